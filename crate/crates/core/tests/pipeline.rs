use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use charrep::fixtures::{self, bundled_dir, content_hash, write_mini_corpus, MINI_CORPUS_HASH};
use charrep::pipeline::{run_pipeline, Manifest, RunConfig, Stage, Workspace};
use charrep::Error;

fn mini(dir: &Path) -> RunConfig {
    write_mini_corpus(dir).unwrap();
    let mut cfg = RunConfig::load(dir.join("config.json")).unwrap();
    cfg.output_dir = dir.join("out");
    cfg
}

fn read_tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn manifest(dir: &Path) -> Manifest {
    serde_json::from_slice(&std::fs::read(dir.join("MANIFEST.json")).unwrap()).unwrap()
}

#[test]
fn regenerated_fixtures_match_pinned_hash() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(write_mini_corpus(dir.path()).unwrap(), MINI_CORPUS_HASH);
    assert_eq!(content_hash(dir.path()).unwrap(), MINI_CORPUS_HASH);
    let generated = read_tree(dir.path());
    let bundled = read_tree(&bundled_dir());
    for (rel, bytes) in &generated {
        assert_eq!(bundled.get(rel), Some(bytes), "bundled copy of {} differs", rel.display());
    }
}

#[test]
fn single_source_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = mini(dir.path());
    cfg.sources.truncate(1);
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(err.to_string().contains("comparison requires ≥2 sources"), "{err}");
}

#[test]
fn shape_of_a_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = mini(dir.path());
    let report = run_pipeline(&cfg).unwrap();
    let out = &cfg.output_dir;
    let n = cfg.sources.len();

    let models = std::fs::read_dir(out.join("models")).unwrap().count();
    assert_eq!(models, n);
    assert_eq!(report.name_similarities.len(), n - 1);
    assert!(report.name_similarities.iter().all(|s| s.reference == "canon"));
    let header = std::fs::read_to_string(out.join("similarity.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap(), "name,cosine_pair1,cosine_pair2");

    let charset: std::collections::BTreeSet<&String> = report.character_set.iter().collect();
    for t in &report.rank_tables {
        for s in &t.by_source {
            assert!(s.ranks.ranks.keys().all(|k| charset.contains(k)), "{}", t.metric);
        }
    }
    for s in &report.name_similarities {
        assert!(s.similarities.keys().all(|k| charset.contains(k)));
    }
    for a in &report.axis_rankings {
        assert!(a.rows.iter().all(|r| charset.contains(&r.word)));
        assert_eq!((a.model1.as_str(), a.model2.as_str()), ("forum", "fanfic"));
    }
    assert_eq!(report.mention_chi_square.result.df as usize, (report.mention_chi_square.rows.len() - 1) * (n - 1));
    let desc = report.descriptions.as_ref().unwrap();
    assert_eq!(desc.contexts, ["slash", "het"]);
    assert_eq!(report.axis_summaries.len(), 8);
    assert_eq!(report.config.output_dir, PathBuf::from("."));

    let m = manifest(out);
    assert!(m.complete);
    assert_eq!(m.stages.len(), Stage::ALL.len());
    assert!(m.files.iter().any(|f| f.path == "report.json"));
    for f in &m.files {
        let bytes = std::fs::read(out.join(&f.path)).unwrap();
        assert_eq!(bytes.len() as u64, f.bytes, "{}", f.path);
    }
}

#[test]
fn failing_stage_leaves_incomplete_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = mini(dir.path());
    let bad = dir.path().join("axes/absent.json");
    std::fs::write(&bad, r#"{"name":"absent","left":["zzqa"],"right":["zzqb"]}"#).unwrap();
    cfg.axis_lexicon_paths.push(bad);
    let err = run_pipeline(&cfg).unwrap_err();
    match &err {
        Error::Stage { stage, .. } => assert_eq!(*stage, "align"),
        e => panic!("unexpected error {e}"),
    }
    assert!(err.is_data_error());
    let m = manifest(&cfg.output_dir);
    assert!(!m.complete);
    assert_eq!(m.stages, ["ingest", "mentions", "charset", "network", "metrics", "embed"]);
    assert!(m.error.unwrap().contains("align"));
    assert!(m.files.iter().any(|f| f.path == "mentions.csv"));
    assert!(!m.files.iter().any(|f| f.path == "report.json"));
}

#[test]
fn standalone_stages_reproduce_the_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = mini(dir.path());
    run_pipeline(&cfg).unwrap();
    let full = read_tree(&cfg.output_dir);

    let mut staged = cfg.clone();
    staged.output_dir = dir.path().join("staged");
    let mut ws = Workspace::new(&staged).unwrap();
    for st in Stage::ALL {
        ws.run_stage(st).unwrap();
    }
    let parts = read_tree(&staged.output_dir);
    for (rel, bytes) in &parts {
        if rel == Path::new("logodds.csv") || rel.starts_with("models") || rel.extension().is_some_and(|e| e == "csv") {
            assert_eq!(full.get(rel), Some(bytes), "{} differs", rel.display());
        }
    }
    assert!(parts.contains_key(Path::new("metrics_forum.csv")));
    assert!(parts.contains_key(Path::new("axes_cruel_kind_rnd.csv")));
}

#[test]
fn stage_without_inputs_names_the_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = mini(dir.path());
    let mut ws = Workspace::new(&cfg).unwrap();
    let err = ws.run_stage(Stage::Metrics).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("stage metrics") && msg.contains("network"), "{msg}");
}

#[test]
fn aligned_axis_variant_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = mini(dir.path());
    cfg.aligned_axes = true;
    let report = run_pipeline(&cfg).unwrap();
    assert_eq!(report.axis_rankings.len(), 4);
    for a in &report.axis_rankings {
        assert!(a.rows.iter().all(|r| r.score.is_finite()));
    }
}

#[test]
fn planted_pair_is_heaviest_in_generated_sources() {
    use charrep::charnet::build_network;
    let specs = fixtures::mini_corpus_specs();
    let aliases = fixtures::alias_table_for(&specs).unwrap();
    for (i, spec) in specs.iter().enumerate().skip(1) {
        let docs = fixtures::generate_synthetic_corpus(spec, 1000 + i as u64).unwrap();
        let names: Vec<String> = aliases.canonical_names().map(String::from).collect();
        let net = build_network(&docs, &names, &aliases).unwrap();
        let max = *net.edges().values().max().unwrap();
        assert_eq!(net.weight("Dorian Ash", "Felix Rowe"), max, "{}", spec.source_id);
    }
}
