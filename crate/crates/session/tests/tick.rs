use assist_session::{InboundMessage, Joystick, OutboundMessage, Session};
use darboux_assist::sim::{make_route, replay, route_start, RouteKind};
use darboux_assist::telemetry::{read_log, LogSource, SimRecord};
use darboux_assist::AssistConfig;
use serde_json::json;
use std::fs::File;
use std::io::BufReader;

fn session(dir: &tempfile::TempDir) -> Session {
    Session::new(AssistConfig::default(), RouteKind::FigureEight, dir.path().to_path_buf()).unwrap()
}

fn state(msg: OutboundMessage) -> SimRecord {
    match msg {
        OutboundMessage::State { record, .. } => record,
        other => panic!("expected state, got {other:?}"),
    }
}

fn input(v: f64, s: f64) -> InboundMessage {
    InboundMessage::Input { v_norm: v, steer_norm: s }
}

fn set_config(v: serde_json::Value) -> InboundMessage {
    InboundMessage::SetConfig { config: v.as_object().unwrap().clone() }
}

#[test]
fn rests_without_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = session(&dir);
    let start = s.sim().pose();
    for k in 1..=100u64 {
        let r = state(s.tick());
        assert_eq!(r.pose, start);
        assert_eq!(r.t, k as f64 * 0.02);
    }
    assert_eq!(s.sim().ticks(), 100);
}

#[test]
fn input_is_held_between_messages() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = session(&dir);
    assert!(s.handle(input(0.5, 0.25)).is_none());
    let a = state(s.tick());
    let b = state(s.tick());
    assert_eq!(a.raw.v_cmd, 1.5);
    assert_eq!(b.raw.v_cmd, 1.5);
    assert!(b.pose.x != a.pose.x);
    assert_eq!(s.held(), Joystick::new(0.5, 0.25));
}

#[test]
fn inputs_are_clamped() {
    assert_eq!(Joystick::new(3.0, -7.0), Joystick::new(1.0, -1.0));
    assert_eq!(Joystick::new(f64::NAN, 0.2), Joystick::new(0.0, 0.2));
    // Pulling back stops; the vehicle does not reverse.
    assert_eq!(Joystick::new(-1.0, 0.0).to_raw(0.3, 3.0).v_cmd, 0.0);
}

#[test]
fn full_forward_with_n1_reaches_speed_in_one_tick() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = session(&dir);
    s.handle(set_config(json!({"n": 1})));
    s.handle(input(1.0, 0.0));
    let r = state(s.tick());
    assert_eq!(r.blended.u_v, 3.0);
}

#[test]
fn set_config_n1_is_passthrough_on_next_tick() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = session(&dir);
    s.handle(input(0.8, 0.4));
    for _ in 0..20 {
        let r = state(s.tick());
        assert!(r.blended != passthrough(&r));
    }
    let ack = s.handle(set_config(json!({"n": 1}))).unwrap();
    assert!(matches!(ack, OutboundMessage::ConfigAck { config, .. } if config.controller.n == 1));
    let r = state(s.tick());
    assert_eq!(r.blended, passthrough(&r));

    s.handle(set_config(json!({"n": 3, "controller_on": false})));
    let r = state(s.tick());
    assert_eq!(r.blended, passthrough(&r));
}

fn passthrough(r: &SimRecord) -> darboux_assist::BlendedCommand {
    darboux_assist::BlendedCommand { u_v: r.user_cmd.u_v_u, u_omega: r.user_cmd.u_omega_u }
}

#[test]
fn bad_config_is_rejected_without_change() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = session(&dir);
    for bad in [json!({"n": 0}), json!({"bogus": 1}), json!({"v_m": [1]}), json!({"controller_on": 1})] {
        let reply = s.handle(set_config(bad)).unwrap();
        assert!(matches!(reply, OutboundMessage::Error { ref code, .. } if code == "bad_config"), "{reply:?}");
    }
    assert_eq!(*s.sim().config(), AssistConfig::default());
}

#[test]
fn reset_returns_to_route_start() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = session(&dir);
    s.handle(input(1.0, 0.3));
    for _ in 0..50 {
        s.tick();
    }
    s.handle(InboundMessage::Reset { route: RouteKind::Spiral });
    let spiral = route_start(&make_route(RouteKind::Spiral, 16.0).unwrap());
    assert_eq!(s.sim().pose(), spiral);
    // Reset also releases the joystick.
    assert_eq!(state(s.tick()).pose, spiral);
    let reply = s.handle(InboundMessage::Reset { route: RouteKind::Custom });
    assert!(matches!(reply, Some(OutboundMessage::Error { .. })));
}

#[test]
fn recorded_session_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = session(&dir);
    // Start moving before recording so the log begins mid-run.
    s.handle(input(1.0, 0.1));
    for _ in 0..30 {
        s.tick();
    }
    s.handle(InboundMessage::Record { on: true });
    let mut live = Vec::new();
    for k in 0..400 {
        if k % 37 == 0 {
            s.handle(input(((k as f64) * 0.1).sin(), ((k as f64) * 0.07).cos()));
        }
        live.push(state(s.tick()));
    }
    s.handle(InboundMessage::Record { on: false });
    assert_eq!(s.recordings().len(), 1);

    let (header, logged) = read_log(BufReader::new(File::open(&s.recordings()[0]).unwrap())).unwrap();
    assert_eq!(header.source, LogSource::Session);
    assert_eq!(logged, live);
    let replayed = replay(&header, logged.iter().map(|r| r.raw)).unwrap();
    assert_eq!(replayed, live);
}

#[test]
fn config_change_splits_recording() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = session(&dir);
    s.handle(input(0.7, -0.2));
    s.handle(InboundMessage::Record { on: true });
    for _ in 0..50 {
        s.tick();
    }
    s.handle(set_config(json!({"n": 5})));
    for _ in 0..50 {
        s.tick();
    }
    s.close().unwrap();
    assert_eq!(s.recordings().len(), 2);
    for path in s.recordings() {
        let (h, logged) = read_log(BufReader::new(File::open(path).unwrap())).unwrap();
        assert_eq!(logged.len(), 50);
        assert_eq!(replay(&h, logged.iter().map(|r| r.raw)).unwrap(), logged);
    }
}

#[test]
fn message_schema() {
    let m: InboundMessage = serde_json::from_str(r#"{"type":"input","v_norm":0.5,"steer_norm":-1}"#).unwrap();
    assert_eq!(m, input(0.5, -1.0));
    let m: InboundMessage = serde_json::from_str(r#"{"type":"reset","route":"figure8"}"#).unwrap();
    assert_eq!(m, InboundMessage::Reset { route: RouteKind::FigureEight });
    let m: InboundMessage = serde_json::from_str(r#"{"type":"record","on":true}"#).unwrap();
    assert_eq!(m, InboundMessage::Record { on: true });
    let m: InboundMessage = serde_json::from_str(r#"{"type":"set_config","config":{"n":1}}"#).unwrap();
    assert!(matches!(m, InboundMessage::SetConfig { .. }));
    for bad in [r#"{"type":"jump"}"#, r#"{"v_norm":1}"#, r#"{"type":"input","v_norm":"x","steer_norm":0}"#, "[]"] {
        assert!(serde_json::from_str::<InboundMessage>(bad).is_err(), "{bad}");
    }

    let err = serde_json::to_value(OutboundMessage::error("bad_message", "nope")).unwrap();
    assert_eq!(err, json!({"type": "error", "code": "bad_message", "text": "nope"}));
    let st = serde_json::to_value(OutboundMessage::State { record: SimRecord::zeroed(), recording: false }).unwrap();
    assert_eq!(st["type"], "state");
    assert!(st["record"]["pose"]["x"].is_number());
}
