//! A client drives the session server as the demon and checks every answer
//! against the library.

use std::io::{BufRead, BufReader, Cursor, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;

use gatherline_cli::server::{serve_stream, serve_tcp};
use gatherline_core::analysis::{forbidden, CaseGenerator};
use gatherline_core::execution::{step, DemonicAction};
use gatherline_core::geometry::Configuration;
use gatherline_core::protocol::{ErrorCode, Response, SessionState, SESSION_PROTOCOL};
use gatherline_core::robogram::GatheringRobogram;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    fn connect(addr: std::net::SocketAddr) -> (Self, Response) {
        let stream = TcpStream::connect(addr).unwrap();
        stream.set_nodelay(true).unwrap();
        let mut client = Client {
            reader: BufReader::new(stream.try_clone().unwrap()),
            writer: stream,
        };
        let hello = client.read();
        (client, hello)
    }

    fn read(&mut self) -> Response {
        let mut line = String::new();
        self.reader.read_line(&mut line).unwrap();
        serde_json::from_str(&line).unwrap_or_else(|e| panic!("{e}: {line:?}"))
    }

    fn send(&mut self, line: &str) -> Response {
        self.writer
            .write_all(format!("{line}\n").as_bytes())
            .unwrap();
        self.read()
    }

    fn state(&mut self, line: &str) -> SessionState {
        match self.send(line) {
            Response::State(s) => s,
            other => panic!("expected a state, got {other:?}"),
        }
    }
}

fn start_server() -> std::net::SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || serve_tcp(listener));
    addr
}

fn step_request(da: &DemonicAction) -> String {
    let activated: Vec<usize> = da.activated().map(|id| id.0).collect();
    let frames: Vec<String> = da
        .frames()
        .map(|(id, f)| {
            format!(
                "{{\"id\":{},\"zoom\":\"{}\",\"reflect\":{}}}",
                id.0, f.zoom, f.reflect
            )
        })
        .collect();
    format!(
        "{{\"type\":\"step\",\"activated\":{activated:?},\"frames\":[{}]}}",
        frames.join(",")
    )
}

#[test]
fn states_match_the_library_round() {
    let addr = start_server();
    let (mut client, hello) = Client::connect(addr);
    assert_eq!(
        hello,
        Response::Hello {
            protocol: SESSION_PROTOCOL.into()
        }
    );

    let gen = CaseGenerator::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let start = gen.configuration(&mut rng);
        let positions: Vec<String> = start
            .positions()
            .iter()
            .map(|l| format!("\"{l}\""))
            .collect();
        let state = client.state(&format!(
            "{{\"type\":\"init\",\"config\":[{}]}}",
            positions.join(",")
        ));
        assert_eq!(state, SessionState::describe(0, &start, Default::default()));

        let mut current = start;
        for round in 1..=12 {
            let da = gen.action(&mut rng, current.len());
            let expected = step(&GatheringRobogram, &da, &current).unwrap();
            let state = client.state(&step_request(&da));
            assert_eq!(
                state,
                SessionState::describe(round, &expected.result, expected.moving.clone())
            );
            assert!(!forbidden(&state.config));
            current = expected.result;
        }
    }
}

#[test]
fn spec_session_example() {
    let addr = start_server();
    let (mut client, _) = Client::connect(addr);
    let s = client.state(r#"{"type":"init","config":"0:2,3:2,1:1"}"#);
    assert_eq!(serde_json::to_string(&s.measure).unwrap(), "[2,4]");
    assert_eq!(s.phase.number(), 2);
    assert!(!s.forbidden);

    // The robot at 1 is the middle tower of three: it stays.
    let after = client
        .state(r#"{"type":"step","activated":[2],"frames":[{"id":2,"zoom":"1","reflect":false}]}"#);
    assert_eq!(after.config, s.config);
    assert!(after.moving.is_empty());

    let bad = client.send(r#"{"type":"step","activated":[2],"frames":[{"id":2,"zoom":"0/1"}]}"#);
    assert!(matches!(
        bad,
        Response::Error {
            code: ErrorCode::BadFrame,
            ..
        }
    ));
    // The session survives the error.
    assert_eq!(client.state(r#"{"type":"query"}"#), after);
}

#[test]
fn sessions_are_independent() {
    let addr = start_server();
    let (mut a, _) = Client::connect(addr);
    let (mut b, _) = Client::connect(addr);
    a.state(r#"{"type":"init","config":"0:3,1:1,5/2:1,3:3"}"#);
    let sb = b.state(r#"{"type":"init","config":"0,1,3"}"#);
    let sa = a.state(r#"{"type":"step","activated":[3,4]}"#);
    assert_eq!(sa.config, Configuration::parse("0:3,3/2:2,3:3").unwrap());
    assert_eq!(b.state(r#"{"type":"query"}"#), sb);
    assert!(matches!(
        b.send("garbage"),
        Response::Error {
            code: ErrorCode::BadRequest,
            ..
        }
    ));
}

#[test]
fn stream_transport() {
    let input = concat!(
        r#"{"type":"hello","protocol":"gatherline-session/1"}"#,
        "\n\n",
        r#"{"type":"query"}"#,
        "\n",
        r#"{"type":"init","config":"0,1,3"}"#,
        "\n",
    );
    let mut output = Vec::new();
    serve_stream(Cursor::new(input), &mut output).unwrap();
    let lines: Vec<Response> = String::from_utf8(output)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);
    assert!(matches!(lines[0], Response::Hello { .. }));
    assert!(matches!(lines[1], Response::Hello { .. }));
    assert!(matches!(
        lines[2],
        Response::Error {
            code: ErrorCode::NoConfig,
            ..
        }
    ));
    assert!(matches!(lines[3], Response::State(_)));
}

#[test]
fn worked_example_through_a_session() {
    use gatherline_core::execution::{execute, ScriptedDemon};
    use gatherline_core::geometry::RobotId;

    let start = Configuration::parse("0:3,1:1,5/2:1,3:3").unwrap();
    let schedule: Vec<DemonicAction> = [&[3, 4][..], &[0, 5, 6], &[1, 2, 7]]
        .iter()
        .map(|ids| DemonicAction::activate(ids.iter().map(|&i| RobotId(i))))
        .collect();
    let trace = execute(
        &GatheringRobogram,
        &mut ScriptedDemon::new(schedule.clone()),
        &start,
        3,
    )
    .unwrap();

    let (mut client, _) = Client::connect(start_server());
    client.state(r#"{"type":"init","config":"0:3,1:1,5/2:1,3:3"}"#);
    for (i, (da, s)) in schedule.iter().zip(&trace.steps).enumerate() {
        let state = client.state(&step_request(da));
        assert_eq!(state.config, s.result);
        assert_eq!(state.measure, s.measure);
        assert_eq!(state.moving, s.moving);
        assert_eq!(state.round, i + 1);
    }
    let reset = client.state(r#"{"type":"reset"}"#);
    assert_eq!((reset.round, reset.config), (0, start));
}
