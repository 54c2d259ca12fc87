//! HTTP/1.1 framing for the service: one thread per connection, keep-alive,
//! Content-Length bodies.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::TcpStream;

use super::{HttpRequest, HttpResponse};

const MAX_HEADER_BYTES: usize = 64 * 1024;
const MAX_HEADERS: usize = 64;
const MAX_BODY_BYTES: usize = 16 * 1024 * 1024;

pub(super) enum Incoming {
    Request {
        request: HttpRequest,
        keep_alive: bool,
    },
    /// Unparseable or unsupported framing; answer and close.
    Reject(HttpResponse),
    Closed,
}

fn reject(status: u16, message: &str) -> Incoming {
    Incoming::Reject(HttpResponse::text(status, message))
}

pub(super) fn read_request(reader: &mut BufReader<TcpStream>) -> io::Result<Incoming> {
    let mut head = Vec::new();
    loop {
        let before = head.len();
        let n = reader.by_ref().take((MAX_HEADER_BYTES - before + 1) as u64).read_until(b'\n', &mut head)?;
        if n == 0 {
            return Ok(if head.is_empty() { Incoming::Closed } else { reject(400, "truncated request") });
        }
        if head.len() > MAX_HEADER_BYTES {
            return Ok(reject(431, "request header too large"));
        }
        // Tolerate blank lines between pipelined requests.
        if before == 0 && (head == b"\r\n" || head == b"\n") {
            head.clear();
            continue;
        }
        if head.ends_with(b"\r\n\r\n") || head.ends_with(b"\n\n") {
            break;
        }
    }

    let mut headers = [httparse::EMPTY_HEADER; MAX_HEADERS];
    let mut parsed = httparse::Request::new(&mut headers);
    match parsed.parse(&head) {
        Ok(httparse::Status::Complete(_)) => {}
        Ok(httparse::Status::Partial) | Err(_) => return Ok(reject(400, "malformed request")),
    }
    let method = parsed.method.unwrap_or_default().to_owned();
    let url = parsed.path.unwrap_or_default().to_owned();
    let http11 = parsed.version == Some(1);

    let header = |name: &str| {
        parsed
            .headers
            .iter()
            .find(|h| h.name.eq_ignore_ascii_case(name))
            .map(|h| String::from_utf8_lossy(h.value).trim().to_owned())
    };
    if header("Transfer-Encoding").is_some_and(|v| !v.eq_ignore_ascii_case("identity")) {
        return Ok(reject(411, "chunked request bodies are not supported; send Content-Length"));
    }
    let length = match header("Content-Length").map(|v| v.parse::<usize>()) {
        None => 0,
        Some(Ok(n)) if n <= MAX_BODY_BYTES => n,
        Some(Ok(_)) => return Ok(reject(413, "request body too large")),
        Some(Err(_)) => return Ok(reject(400, "invalid Content-Length")),
    };
    let connection = header("Connection").map(|v| v.to_ascii_lowercase());
    let keep_alive = match connection.as_deref() {
        Some(v) if v.contains("close") => false,
        Some(v) if v.contains("keep-alive") => true,
        _ => http11,
    };
    let content_type = header("Content-Type");

    let mut body = vec![0; length];
    reader.read_exact(&mut body)?;
    Ok(Incoming::Request { request: HttpRequest { method, url, content_type, body }, keep_alive })
}

fn reason(status: u16) -> &'static str {
    match status {
        200 => "OK",
        400 => "Bad Request",
        404 => "Not Found",
        405 => "Method Not Allowed",
        411 => "Length Required",
        413 => "Payload Too Large",
        431 => "Request Header Fields Too Large",
        500 => "Internal Server Error",
        _ => "",
    }
}

pub(super) fn write_response(out: &mut impl Write, res: &HttpResponse, keep_alive: bool) -> io::Result<()> {
    let head = format!(
        "HTTP/1.1 {} {}\r\nContent-Type: {}\r\nContent-Length: {}\r\nConnection: {}\r\n\r\n",
        res.status,
        reason(res.status),
        res.content_type,
        res.body.len(),
        if keep_alive { "keep-alive" } else { "close" }
    );
    let mut buf = Vec::with_capacity(head.len() + res.body.len());
    buf.extend_from_slice(head.as_bytes());
    buf.extend_from_slice(&res.body);
    out.write_all(&buf)?;
    out.flush()
}
