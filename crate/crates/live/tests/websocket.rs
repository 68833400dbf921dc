#![allow(clippy::field_reassign_with_default)]

use std::path::Path;
use std::time::{Duration, Instant};

use forage_core::config::{Condition, SessionConfig};
use forage_core::replay::replay;
use forage_live::protocol::{Phase, ServerMessage};
use forage_live::{bind, ServeOptions};
use futures::{SinkExt, StreamExt};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Socket = WebSocketStream<MaybeTlsStream<TcpStream>>;

fn short_config(condition: Condition, duration: f64) -> SessionConfig {
    let mut config = SessionConfig::default();
    config.condition = condition;
    config.seed = 7;
    config.trials_per_block = 1;
    config.trial_duration = duration;
    config.break_duration = 0.0;
    config
}

async fn start(config: SessionConfig, log: &Path, speed: f64) -> String {
    let options = ServeOptions {
        port: 0,
        log_path: log.to_path_buf(),
        speed,
    };
    let (addr, server) = bind(config, options).await.unwrap();
    tokio::spawn(server);
    format!("ws://127.0.0.1:{}/ws", addr.port())
}

async fn send(socket: &mut Socket, text: &str) {
    socket.send(Message::Text(text.into())).await.unwrap();
}

async fn next_message(socket: &mut Socket) -> Option<ServerMessage> {
    loop {
        let frame = tokio::time::timeout(Duration::from_secs(10), socket.next())
            .await
            .expect("server went quiet")?;
        match frame.ok()? {
            Message::Text(text) => return Some(serde_json::from_str(text.as_str()).unwrap()),
            Message::Close(_) => return None,
            _ => continue,
        }
    }
}

/// Collects server messages until the trial reports done or aborted.
async fn until_trial_over(socket: &mut Socket) -> Vec<ServerMessage> {
    let mut seen = Vec::new();
    while let Some(message) = next_message(socket).await {
        let over = matches!(
            message,
            ServerMessage::TrialPhase {
                phase: Phase::Done | Phase::Aborted,
                ..
            }
        );
        seen.push(message);
        if over {
            break;
        }
    }
    seen
}

fn wait_for_log(path: &Path, needle: &str) -> String {
    let deadline = Instant::now() + Duration::from_secs(10);
    loop {
        let text = std::fs::read_to_string(path).unwrap_or_default();
        if text.contains(needle) || Instant::now() > deadline {
            return text;
        }
        std::thread::sleep(Duration::from_millis(20));
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn idle_pilot_without_copilot_scores_zero() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("idle.jsonl");
    let url = start(short_config(Condition::NoCp, 1.0), &log, 10.0).await;
    let (mut socket, _) = connect_async(&url).await.unwrap();
    send(&mut socket, r#"{"type":"control","command":"start"}"#).await;
    let seen = until_trial_over(&mut socket).await;

    assert!(seen.iter().all(|m| !matches!(m, ServerMessage::ScoreUpdate { .. })));
    assert!(seen.iter().all(|m| !matches!(m, ServerMessage::AudioEvent { .. })));
    let snapshots = seen.iter().filter(|m| matches!(m, ServerMessage::Snapshot { .. })).count();
    assert_eq!(snapshots, 20);

    let text = wait_for_log(&log, "trial_end");
    assert!(text.contains(r#""kind":"trial_end","score":0,"partial":false"#), "{text}");
    assert!(replay(&text, None).unwrap().is_match());
}

#[tokio::test(flavor = "multi_thread")]
async fn contact_is_answered_within_a_tick() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("contact.jsonl");
    let url = start(short_config(Condition::Pav, 2.0), &log, 1.0).await;
    let (mut socket, _) = connect_async(&url).await.unwrap();
    send(&mut socket, r#"{"type":"control","command":"start"}"#).await;

    let sent_at = loop {
        if let Some(ServerMessage::Snapshot { tick, .. }) = next_message(&mut socket).await {
            if tick == 5 {
                send(&mut socket, r#"{"type":"contact","slot":0,"hand":"harvest"}"#).await;
                break tick;
            }
        }
    };
    let seen = until_trial_over(&mut socket).await;
    let score_tick = seen.iter().find_map(|m| match m {
        ServerMessage::ScoreUpdate { tick, .. } => Some(*tick),
        _ => None,
    });
    let sound = seen.iter().find_map(|m| match m {
        ServerMessage::AudioEvent { tick, sound_id } if sound_id == "gain" || sound_id == "loss" => {
            Some(*tick)
        }
        _ => None,
    });
    let score_tick = score_tick.expect("no score update");
    assert!(score_tick - sent_at <= 2, "score at {score_tick}, contact after {sent_at}");
    assert_eq!(sound, Some(score_tick));

    let text = wait_for_log(&log, "trial_end");
    assert!(text.contains(r#""kind":"action","slot":0,"hand":"harvest""#));
    assert!(replay(&text, None).unwrap().is_match());
}

#[tokio::test(flavor = "multi_thread")]
async fn night_snapshots_carry_no_colour() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("night.jsonl");
    let mut config = short_config(Condition::NoCp, 2.0);
    config.light.day_duration = 0.5;
    config.light.dusk_duration = 0.0;
    config.light.night_duration = 1.0;
    config.light.dawn_duration = 0.0;
    let url = start(config, &log, 8.0).await;
    let (mut socket, _) = connect_async(&url).await.unwrap();
    send(&mut socket, r#"{"type":"control","command":"start"}"#).await;

    let (mut day, mut night) = (0, 0);
    while let Some(message) = next_message(&mut socket).await {
        match &message {
            ServerMessage::Snapshot { light, .. } => {
                let text = serde_json::to_string(&message).unwrap();
                if *light < 0.95 {
                    night += 1;
                    assert!(!text.contains("hue") && !text.contains("sat"), "{text}");
                } else {
                    day += 1;
                    assert!(text.contains("hue"));
                }
            }
            ServerMessage::TrialPhase { phase: Phase::Done, .. } => break,
            _ => {}
        }
    }
    assert!(day > 0 && night > 0);
}

#[tokio::test(flavor = "multi_thread")]
async fn second_pilot_is_turned_away() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("busy.jsonl");
    let url = start(short_config(Condition::NoCp, 5.0), &log, 1.0).await;
    let (mut first, _) = connect_async(&url).await.unwrap();
    assert!(matches!(
        next_message(&mut first).await,
        Some(ServerMessage::TrialPhase { phase: Phase::Waiting, .. })
    ));

    let (mut second, _) = connect_async(&url).await.unwrap();
    let frame = tokio::time::timeout(Duration::from_secs(5), second.next())
        .await
        .unwrap()
        .unwrap()
        .unwrap();
    match frame {
        Message::Close(Some(close)) => assert!(close.reason.contains("already connected")),
        other => panic!("expected a close frame, got {other:?}"),
    }

    send(&mut first, r#"{"type":"control","command":"abort"}"#).await;
}

#[tokio::test(flavor = "multi_thread")]
async fn disconnect_leaves_a_replayable_partial_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("partial.jsonl");
    let url = start(short_config(Condition::Bandit, 60.0), &log, 4.0).await;
    let (mut socket, _) = connect_async(&url).await.unwrap();
    send(&mut socket, r#"{"type":"control","command":"start"}"#).await;

    while let Some(message) = next_message(&mut socket).await {
        if let ServerMessage::Snapshot { tick, .. } = message {
            if tick == 10 {
                send(&mut socket, r#"{"type":"contact","slot":3,"hand":"teach"}"#).await;
            }
            if tick == 30 {
                send(&mut socket, r#"{"type":"contact","slot":1,"hand":"harvest"}"#).await;
            }
            if tick == 60 {
                break;
            }
        }
    }
    socket.close(None).await.unwrap();
    drop(socket);

    let text = wait_for_log(&log, "trial_end");
    assert!(text.contains(r#""partial":true"#), "{text}");
    let lines = text.lines().count();
    assert!(lines > 60, "log too short: {lines} lines");
    assert!(replay(&text, None).unwrap().is_match());
}
