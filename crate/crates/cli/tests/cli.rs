use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn justify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_justify")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenario/tmi2").join(name);
    p.to_string_lossy().into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn show_config_prints_every_default() {
    let o = justify(&["--show-config"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for line in [
        "action_execution_time_range=8521",
        "water_level_minimum=30",
        "upper_pressure_boundary_primary_loop=2255",
        "porv_closure_setpoint=2205",
        "hpis_actuation_pressure=1600",
        "literal_suppression=false",
    ] {
        assert!(text.lines().any(|l| l == line), "{line} missing from\n{text}");
    }
}

#[test]
fn show_config_reads_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("kb.conf");
    std::fs::write(&cfg, "# shorter suppression\naction_execution_time_range = 600\n").unwrap();
    let o = justify(&["--show-config", "--config", path(&cfg)]);
    assert!(stdout(&o).contains("action_execution_time_range=600\n"));
    std::fs::write(&cfg, "no_such_key=1\n").unwrap();
    let o = justify(&["--show-config", "--config", path(&cfg)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no_such_key"), "{}", stderr(&o));
}

#[test]
fn missing_subcommand_fails() {
    assert!(!justify(&[]).status.success());
}

#[test]
fn shipped_fixtures_check() {
    let o = justify(&["check-fixtures"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("142 windows replayed, 0 failures"));
}

#[test]
fn regenerated_fixtures_check_and_corruption_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tmi2");
    assert!(justify(&["synth-tmi2", "--out", path(&out)]).status.success());
    for f in ["sensors.csv", "actions.csv", "expected/inferred_actions.txt", "expected/graphs/open_valve_first.json"] {
        assert_eq!(std::fs::read(out.join(f)).unwrap(), std::fs::read(fixture(f)).unwrap(), "{f}");
    }
    let actions_file = out.join("expected/inferred_actions.txt");
    let text = std::fs::read_to_string(&actions_file).unwrap();
    std::fs::write(&actions_file, text.replace("4403", "4404")).unwrap();
    let o = justify(&["check-fixtures", "--dir", path(&out)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("expected/inferred_actions.txt"), "{}", stderr(&o));
}

#[test]
fn replay_writes_one_document_per_window() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let kb = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/kb");
    let o = justify(&[
        "replay", "--rules", path(&kb), "--sensors", &fixture("sensors.csv"), "--actions", &fixture("actions.csv"),
        "--step", "60", "--horizon", "8521", "--out", path(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let names: Vec<PathBuf> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
    let count = |ext: &str| names.iter().filter(|p| p.extension().is_some_and(|x| x == ext)).count();
    assert_eq!(count("txt"), 142);
    assert_eq!(count("json"), 143);
    let last = std::fs::read_to_string(out.join("window_08521.txt")).unwrap();
    assert!(last.starts_with("% window 8521 [8461, 8521]\n"));
    assert!(last.contains("recommendation(turn_on,high_pressure_injection_pump,8521)\n"));
}

#[test]
fn replay_reports_bad_input_lines() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.csv");
    std::fs::write(&s, "time,variable,value\n0,reactor_power,100\n3,flux_capacitor,1\n").unwrap();
    let o = justify(&["replay", "--sensors", path(&s), "--actions", &fixture("actions.csv"), "--out", path(dir.path())]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 3: unknown variable `flux_capacitor`"), "{}", stderr(&o));
}

#[test]
fn explain_prints_dot() {
    let o = justify(&["explain", "--atom", "steam(primary_loop_A,901)", "--window", "960", "--format", "dot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dot = stdout(&o);
    assert!(dot.contains("digraph explanation"));
    assert!(dot.contains("label=\"1213<1258\""));
    assert!(dot.contains("saturation(573,1258)"));
}

#[test]
fn explain_prints_documents() {
    let o = justify(&[
        "explain", "--short-suppression", "--atom", "recommendation(open,auxiliary_feedwater_a_block_valve,1201)",
        "--window", "1260", "--format", "doc",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["graphs"].as_array().unwrap().len(), 2);
    assert_eq!(doc["truncated"], false);
}

#[test]
fn explain_rejects_unknown_window_and_atom() {
    let o = justify(&["explain", "--atom", "steam(primary_loop_A,901)", "--window", "950"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no window ends at 950"));
    let o = justify(&["explain", "--atom", "steam(primary_loop_Z,901)", "--window", "960"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("does not occur"), "{}", stderr(&o));
}

#[test]
fn write_kb_round_trips_through_replay() {
    let dir = tempfile::tempdir().unwrap();
    let kb = dir.path().join("kb");
    assert!(justify(&["write-kb", "--out", path(&kb)]).status.success());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, rules) in [(&a, Some(&kb)), (&b, None)] {
        let mut args = vec!["replay", "--horizon", "600", "--out", path(out)];
        if let Some(r) = rules {
            args.extend(["--rules", path(r)]);
        }
        assert!(justify(&args).status.success());
    }
    for w in ["window_00060.json", "window_00600.txt", "session.json"] {
        assert_eq!(std::fs::read(a.join(w)).unwrap(), std::fs::read(b.join(w)).unwrap());
    }
}

#[test]
fn two_processes_exchange_requests() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let addr = format!("127.0.0.1:{port}");
    let mut server = Command::new(env!("CARGO_BIN_EXE_justify"))
        .args(["explain-server", "--listen", &addr, "--horizon", "300"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let transcript = dir.path().join("t.ndjson");
    let o = justify(&["diagnose", "--connect", &addr, "--horizon", "300", "--transcript", path(&transcript)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("5 requests sent, 5 responses"), "{}", stderr(&o));
    assert!(server.wait().unwrap().success());
    let ids: Vec<u64> = std::fs::read_to_string(&transcript)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["id"].as_u64().unwrap())
        .collect();
    assert_eq!(ids, vec![1, 2, 3, 4, 5]);
}

#[test]
fn diagnose_without_peer() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let o = justify(&["diagnose", "--connect", &format!("127.0.0.1:{port}"), "--horizon", "120"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("(diagnosis only)"), "{}", stderr(&o));
}

fn http_get(port: u16, uri: &str) -> Option<String> {
    use std::io::{Read, Write};
    let mut s = std::net::TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(s, "GET {uri} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").ok()?;
    let mut body = String::new();
    s.read_to_string(&mut body).ok()?;
    Some(body)
}

#[test]
fn serve_takes_its_port_from_the_environment() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut server = Command::new(env!("CARGO_BIN_EXE_justify"))
        .args(["serve", "--scenario", "tmi2", "--pace-ms", "0"])
        .env("JUSTIFY_PORT", port.to_string())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut reply = None;
    for _ in 0..100 {
        reply = http_get(port, "/config");
        if reply.is_some() {
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(100));
    }
    let events = http_get(port, "/events");
    let missing = http_get(port, "/window/999999");
    server.kill().unwrap();
    server.wait().unwrap();
    let reply = reply.expect("server answers");
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    assert!(reply.contains("\"horizon\":8521"));
    assert!(events.unwrap().contains("Pressurizer block valve closed"));
    assert!(missing.unwrap().starts_with("HTTP/1.1 404"));
}
