//! Loopback HTTP server answering chat-completions requests from a closure.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};

type Handler = dyn Fn(&Value) -> (u16, Value) + Send + Sync;

pub struct Mock {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Value>>>,
}

impl Mock {
    pub fn request_count(&self) -> usize {
        self.requests.lock().unwrap().len()
    }
}

/// Body of a successful chat completion carrying `content`.
pub fn chat(content: &str) -> (u16, Value) {
    (200, json!({ "choices": [{ "index": 0, "message": { "role": "assistant", "content": content } }] }))
}

/// The user prompt: the last user message that is not a retry note.
pub fn prompt_of(req: &Value) -> String {
    req["messages"]
        .as_array()
        .and_then(|m| {
            m.iter()
                .rev()
                .filter(|m| m["role"] == "user")
                .filter_map(|m| m["content"].as_str())
                .find(|c| !c.starts_with("The document failed"))
        })
        .unwrap_or_default()
        .to_string()
}

/// Retry notes seen so far in the conversation.
pub fn retries(req: &Value) -> usize {
    req["messages"].as_array().map_or(0, |m| {
        m.iter()
            .filter(|m| m["role"] == "user" && m["content"].as_str().is_some_and(|c| c.starts_with("The document failed")))
            .count()
    })
}

fn serve_one(mut stream: TcpStream, handler: &Handler, log: &Mutex<Vec<Value>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut len = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((k, v)) = l.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                len = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0; len];
    if reader.read_exact(&mut body).is_err() {
        return;
    }
    let req: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
    log.lock().unwrap().push(req.clone());
    let (status, answer) = handler(&req);
    let text = answer.to_string();
    let reply = format!(
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
        text.len()
    );
    let _ = stream.write_all(reply.as_bytes());
}

/// Starts a server on an ephemeral port; it lives until the test process ends.
pub fn serve<F>(handler: F) -> Mock
where
    F: Fn(&Value) -> (u16, Value) + Send + Sync + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&requests);
    let handler: Arc<Handler> = Arc::new(handler);
    thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let h = Arc::clone(&handler);
            let l = Arc::clone(&log);
            thread::spawn(move || serve_one(stream, h.as_ref(), &l));
        }
    });
    Mock { url, requests }
}
