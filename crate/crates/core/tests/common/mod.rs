pub mod cluster;
pub mod earley;
pub mod fixtures;
pub mod mutate;
pub mod oracle;
pub mod st_fuzz;
