//! Line-delimited session transport over TCP or any reader/writer pair.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;

use gatherline_core::protocol::Session;

/// Greets the client, then answers one response line per request line until
/// the reader is exhausted.
pub fn serve_stream<R: BufRead, W: Write>(reader: R, mut writer: W) -> io::Result<()> {
    let mut session = Session::default();
    let hello = serde_json::to_string(&Session::hello()).expect("hello serializes");
    send(&mut writer, hello)?;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        send(&mut writer, session.handle_line(&line))?;
    }
    Ok(())
}

/// Writes one response line in a single call.
fn send<W: Write>(writer: &mut W, mut line: String) -> io::Result<()> {
    line.push('\n');
    writer.write_all(line.as_bytes())?;
    writer.flush()
}

fn handle_connection(stream: TcpStream) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let reader = BufReader::new(stream.try_clone()?);
    serve_stream(reader, stream)
}

/// Accepts connections forever, one thread and one session per connection.
pub fn serve_tcp(listener: TcpListener) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        thread::spawn(move || {
            let peer = stream.peer_addr().ok();
            if let Err(e) = handle_connection(stream) {
                eprintln!("session {peer:?} ended: {e}");
            }
        });
    }
    Ok(())
}
