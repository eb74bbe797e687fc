//! Metadata skeleton used when regenerating PLCopen documents.

use std::collections::BTreeMap;

use thiserror::Error;

use super::xml::{parse_document, Element, XmlSyntaxError};

pub const DEFAULT_TEMPLATE: &str = include_str!("../../templates/plcopen-default.xml");

/// SFC element kinds the emitter needs an exemplar for.
pub const REQUIRED_KINDS: &[&str] = &[
    "step",
    "transition",
    "selectionDivergence",
    "selectionConvergence",
    "simultaneousDivergence",
    "simultaneousConvergence",
    "jumpStep",
    "actionBlock",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template is not well-formed: {0}")]
    Xml(#[from] XmlSyntaxError),
    #[error("template lacks {0}")]
    Missing(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Exemplar {
    pub width: Option<String>,
    pub height: Option<String>,
    /// Vendor extension block copied verbatim onto every emitted element of this kind.
    pub add_data: Option<Element>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetadataTemplate {
    pub file_header: Element,
    pub content_header: Element,
    exemplars: BTreeMap<String, Exemplar>,
}

impl MetadataTemplate {
    /// Loads a template from a PLCopen project containing one SFC POU with an
    /// exemplar of every element kind in [`REQUIRED_KINDS`].
    pub fn from_xml(xml: &str) -> Result<Self, TemplateError> {
        let root = parse_document(xml)?;
        let file_header = root
            .find("fileHeader")
            .cloned()
            .ok_or_else(|| TemplateError::Missing("fileHeader".into()))?;
        let content_header = root
            .find("contentHeader")
            .cloned()
            .ok_or_else(|| TemplateError::Missing("contentHeader".into()))?;
        let sfc = root
            .path(&["types", "pous"])
            .into_iter()
            .flat_map(|p| p.find_all("pou"))
            .find_map(|pou| pou.path(&["body", "SFC"]))
            .ok_or_else(|| TemplateError::Missing("an SFC body".into()))?;
        let mut exemplars = BTreeMap::new();
        for el in sfc.elements() {
            let kind = el.local_name();
            if REQUIRED_KINDS.contains(&kind) && !exemplars.contains_key(kind) {
                exemplars.insert(
                    kind.to_string(),
                    Exemplar {
                        width: el.get_attr("width").map(str::to_string),
                        height: el.get_attr("height").map(str::to_string),
                        add_data: el.find("addData").cloned(),
                    },
                );
            }
        }
        for kind in REQUIRED_KINDS {
            if !exemplars.contains_key(*kind) {
                return Err(TemplateError::Missing(format!("a {kind} exemplar")));
            }
        }
        Ok(MetadataTemplate {
            file_header,
            content_header,
            exemplars,
        })
    }

    pub fn exemplar(&self, kind: &str) -> Result<&Exemplar, TemplateError> {
        self.exemplars
            .get(kind)
            .ok_or_else(|| TemplateError::Missing(format!("a {kind} exemplar")))
    }
}

impl Default for MetadataTemplate {
    fn default() -> Self {
        MetadataTemplate::from_xml(DEFAULT_TEMPLATE).expect("shipped template is complete")
    }
}
