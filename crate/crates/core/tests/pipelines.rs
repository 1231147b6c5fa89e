mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use common::{cursor_total, personas, themes, CrashAfter, Harness};
use emocot_core::golden::{
    concise_script, cycled_mads_plans, golden_mads_plans, mads_script, ConcisePlan, DialoguePlan,
};
use emocot_core::pipeline::{
    run_concise_batch, run_mads_batch, Checkpoint, ConciseBatchConfig, ConciseStats,
    DialogueRecord, MadsConfig, MadsStats,
};

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn mads(dir: &Path, n: usize, every: usize) -> emocot_core::pipeline::MadsSummary {
    let h = Harness::scripted(mads_script(&golden_mads_plans(), 3), 3);
    let config = MadsConfig {
        checkpoint_every: every,
        ..MadsConfig::default()
    };
    run_mads_batch(h.ctx(), &personas(6), &themes(), n, 42, &config, dir, false).unwrap()
}

#[test]
fn mads_golden_run() {
    let dir = tempfile::tempdir().unwrap();
    let summary = mads(dir.path(), 5, 50);
    assert_eq!(summary.stats.dialogues, 5);
    assert_eq!(summary.stats.failed, 0);
    assert_eq!(summary.stats.background_regenerations, 1);
    assert_eq!(summary.stats.verdicts_defaulted, 0);

    let records: Vec<DialogueRecord> = read(dir.path(), "metadata.jsonl")
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let plans = golden_mads_plans();
    for (r, plan) in records.iter().zip(&plans) {
        assert_eq!(r.conversation_length, plan.turns());
        assert_eq!(r.eu_items, DialoguePlan::valid_items(&plan.eu));
        assert_eq!(r.ea_items, DialoguePlan::valid_items(&plan.ea));
        assert!((3..=4).contains(&r.eu_items) && (3..=4).contains(&r.ea_items));
        let at: Vec<usize> = r.verdicts.iter().map(|v| v.evaluated_at_turn).collect();
        let expected: Vec<usize> = (0..at.len()).map(|k| 4 + 2 * k).collect();
        assert_eq!(at, expected);
        assert_eq!(*at.last().unwrap(), r.conversation_length);
    }
    assert_eq!(read(dir.path(), "eu_items.jsonl").lines().count(), 19);
    assert_eq!(read(dir.path(), "ea_items.jsonl").lines().count(), 19);
    assert!(read(dir.path(), "eu_items.jsonl").starts_with("{\"id\":\"mads-00000-eu-1\""));
    assert!(dir.path().join("stats.json").is_file());
    assert!(summary.checkpoints.is_empty());
}

#[test]
fn mads_reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    mads(a.path(), 5, 2);
    mads(b.path(), 5, 2);
    for f in ["eu_items.jsonl", "ea_items.jsonl", "metadata.jsonl", "stats.json", "checkpoint.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f}");
    }
    // rerunning into the same directory overwrites with the same bytes
    let before = read(a.path(), "metadata.jsonl");
    mads(a.path(), 5, 2);
    assert_eq!(read(a.path(), "metadata.jsonl"), before);
}

#[test]
fn mads_checkpoints_at_interval() {
    let dir = tempfile::tempdir().unwrap();
    let s = mads(dir.path(), 5, 2);
    let names: Vec<String> = s
        .checkpoints
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["checkpoint-000002.json", "checkpoint-000004.json"]);
}

#[test]
fn mads_resume_skips_completed_dialogues() {
    let plans = cycled_mads_plans(8);
    let script = mads_script(&plans, 3);
    let config = MadsConfig {
        checkpoint_every: 3,
        ..MadsConfig::default()
    };
    let (ps, ts) = (personas(6), themes());

    let full = tempfile::tempdir().unwrap();
    let h = Harness::scripted(script.clone(), 3);
    run_mads_batch(h.ctx(), &ps, &ts, 8, 9, &config, full.path(), false).unwrap();
    let total_calls = h.gateway.calls();
    assert_eq!(total_calls, script.len());

    // Crash partway through dialogue 7 (index 6), after the checkpoint at 6.
    let crashed = tempfile::tempdir().unwrap();
    let h = Harness::new(CrashAfter::new(script.clone(), total_calls - 20), 3);
    let result = catch_unwind(AssertUnwindSafe(|| {
        run_mads_batch(h.ctx(), &ps, &ts, 8, 9, &config, crashed.path(), false)
    }));
    assert!(result.is_err());
    let cp = Checkpoint::<MadsStats>::latest(crashed.path()).unwrap().unwrap();
    assert_eq!(cp.completed, 6);

    let h = Harness::scripted(script.clone(), 3);
    run_mads_batch(h.ctx(), &ps, &ts, 8, 9, &config, crashed.path(), true).unwrap();
    assert_eq!(h.gateway.calls(), total_calls - cursor_total(cp.backend_cursor.as_ref().unwrap()));
    for f in ["eu_items.jsonl", "ea_items.jsonl", "metadata.jsonl", "stats.json"] {
        assert_eq!(read(full.path(), f), read(crashed.path(), f), "{f}");
    }
}

fn concise_config() -> ConciseBatchConfig {
    ConciseBatchConfig::default()
}

#[test]
fn concise_25_checkpoints_and_finals() {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::scripted(concise_script(&vec![ConcisePlan::all_valid(1); 25], 3), 3);
    let summary =
        run_concise_batch(h.ctx(), &personas(30), 25, 5, &concise_config(), dir.path(), false).unwrap();
    assert_eq!(summary.checkpoints, ["checkpoints/checkpoint-000010.json", "checkpoints/checkpoint-000020.json"]);
    assert_eq!(summary.stats.sessions, 25);
    assert_eq!(read(dir.path(), "items_final.jsonl").lines().count(), 50);
    let finals: serde_json::Value = serde_json::from_str(&read(dir.path(), "personas_final.json")).unwrap();
    assert_eq!(finals.as_array().unwrap().len(), 25);
    assert!(finals[0]["profile"]["emotion_mix"].is_string());

    let c10 = Checkpoint::<ConciseStats>::load(&dir.path().join("checkpoints/checkpoint-000010.json")).unwrap();
    let c20 = Checkpoint::<ConciseStats>::load(&dir.path().join("checkpoints/checkpoint-000020.json")).unwrap();
    assert_eq!(c10.completed_ids.len(), 10);
    assert_eq!(&c20.completed_ids[..10], &c10.completed_ids[..]);
    assert_eq!(c20.profile_draws, 20);
}

#[test]
fn concise_sample_is_capped() {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::scripted(concise_script(&vec![ConcisePlan::all_valid(1); 3], 3), 3);
    let s = run_concise_batch(h.ctx(), &personas(100), 3, 5, &concise_config(), dir.path(), false).unwrap();
    assert_eq!((s.stats.sampled, s.stats.sessions), (3, 3));

    let dir = tempfile::tempdir().unwrap();
    let h = Harness::scripted(concise_script(&vec![ConcisePlan::all_valid(1); 4], 3), 3);
    let s = run_concise_batch(h.ctx(), &personas(4), 50, 5, &concise_config(), dir.path(), false).unwrap();
    assert_eq!(s.stats.sessions, 4);
}

#[test]
fn concise_resume_is_byte_identical() {
    let script = concise_script(&vec![ConcisePlan::all_valid(1); 25], 3);
    let ps = personas(30);
    let full = tempfile::tempdir().unwrap();
    let h = Harness::scripted(script.clone(), 3);
    run_concise_batch(h.ctx(), &ps, 25, 5, &concise_config(), full.path(), false).unwrap();
    let total = h.gateway.calls();
    let per_session = total / 25;

    let crashed = tempfile::tempdir().unwrap();
    let h = Harness::new(CrashAfter::new(script.clone(), 12 * per_session + 5), 3);
    let r = catch_unwind(AssertUnwindSafe(|| {
        run_concise_batch(h.ctx(), &ps, 25, 5, &concise_config(), crashed.path(), false)
    }));
    assert!(r.is_err());
    let cp = Checkpoint::<ConciseStats>::latest(crashed.path()).unwrap().unwrap();
    assert_eq!(cp.completed, 10);

    let h = Harness::scripted(script, 3);
    run_concise_batch(h.ctx(), &ps, 25, 5, &concise_config(), crashed.path(), true).unwrap();
    assert_eq!(h.gateway.calls(), 15 * per_session);
    assert_eq!(cursor_total(cp.backend_cursor.as_ref().unwrap()), 10 * per_session);
    assert_eq!(read(full.path(), "items_final.jsonl"), read(crashed.path(), "items_final.jsonl"));
    assert_eq!(read(full.path(), "personas_final.json"), read(crashed.path(), "personas_final.json"));
}
