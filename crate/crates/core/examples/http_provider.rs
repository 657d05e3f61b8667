//! Fetch frames from an inference server over HTTP. Uses $LGSEL_ENDPOINT
//! when set; otherwise starts a local server that answers with stub frames.
//!
//! cargo run --example http_provider

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;

use lgsel::provider::{
    FrameRequest, HttpProvider, LogitProvider, LogitsRequest, LogitsResponse, StubProvider, ENDPOINT_ENV,
};

fn local_server() -> std::io::Result<String> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let url = format!("http://{}", listener.local_addr()?);
    let stub = StubProvider::new(1000, 5);
    std::thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0;
            let mut line = String::new();
            while reader.read_line(&mut line).unwrap_or(0) > 0 && line != "\r\n" {
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap_or(0);
                }
                line.clear();
            }
            let mut body = vec![0; length];
            if reader.read_exact(&mut body).is_err() {
                continue;
            }
            let req: LogitsRequest = serde_json::from_slice(&body).unwrap();
            let frame = stub
                .get_frame(&FrameRequest::new(req.prompt).at_step(req.step).with_template(req.template))
                .unwrap();
            let payload = serde_json::to_string(&LogitsResponse::from_frame(&frame)).unwrap();
            let mut stream = stream;
            let _ = write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
        }
    });
    Ok(url)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let endpoint = match std::env::var(ENDPOINT_ENV) {
        Ok(e) => e,
        Err(_) => local_server()?,
    };
    let provider = HttpProvider::new(&endpoint, 4)?;
    println!("{}", provider.describe());
    for step in 0..3 {
        let frame = provider.get_frame(&FrameRequest::new("The capital of France is").at_step(step))?;
        let best = frame
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        println!("step {step}: vocab {} argmax token {best}", frame.vocab_size());
    }
    Ok(())
}
