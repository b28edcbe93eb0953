use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use cyic_core::corpus::{self, PaperIndex};
use cyic_core::detect::{self, CyicEvent};
use cyic_core::phase::{self, PhaseSegmentation};
use cyic_core::pipeline::{self, PipelineConfig};
use cyic_core::report::{self, RankingBundle, GENERAL_CLUSTER};
use cyic_core::synth::{self, Scenario};
use cyic_core::taxonomy::{self, ClusterMap};
use cyic_core::{metrics, CorpusStats, SCHEMA_VERSION};

use crate::artifacts::*;
use crate::config::RunConfig;
use crate::error::CliError;

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn load_map(cfg: &RunConfig) -> anyhow::Result<ClusterMap> {
    let path = cfg.require(&cfg.clusters, "clusters")?;
    let map = ClusterMap::load(path).with_context(|| format!("loading {}", path.display()))?;
    Ok(map.with_mode(cfg.ingest))
}

pub fn ingest(cfg: &RunConfig) -> anyhow::Result<()> {
    let papers = cfg.require(&cfg.papers, "papers")?;
    let citations = cfg.require(&cfg.citations, "citations")?;
    let out = cfg.out_dir()?;
    let index = PaperIndex::from_path(papers, cfg.ingest)?;
    let edges = corpus::ingest_citations(citations, &index, cfg.ingest, |_| {})?;
    let stats = CorpusStats::new(&index, &edges);
    ensure_dir(out)?;
    write_json(
        out,
        CORPUS_STATS,
        &CorpusStatsFile {
            schema_version: SCHEMA_VERSION,
            stats: stats.clone(),
        },
    )?;
    println!(
        "ingest: {} papers ({} skipped), {} edges ({} skipped), {} subjects",
        stats.paper_count, stats.skipped_papers, stats.edge_count, stats.skipped_edges, stats.subject_count
    );
    Ok(())
}

pub fn detect(cfg: &RunConfig) -> anyhow::Result<()> {
    let papers = cfg.require(&cfg.papers, "papers")?;
    let citations = cfg.require(&cfg.citations, "citations")?;
    let out = cfg.out_dir()?;
    let map = cfg.clusters.as_ref().map(|_| load_map(cfg)).transpose()?;
    let window = cfg.window_or_default();
    let pc = PipelineConfig {
        window,
        counting: cfg.counting,
        ingest: cfg.ingest,
        params: cfg.params,
    };
    let mut run = pipeline::run_detection(papers, citations, &pc)?;
    let classification = map
        .as_ref()
        .map(|m| taxonomy::classify_events(&mut run.events, m))
        .transpose()?;

    ensure_dir(out)?;
    write_json(
        out,
        CORPUS_STATS,
        &CorpusStatsFile {
            schema_version: SCHEMA_VERSION,
            stats: run.stats.clone(),
        },
    )?;
    let path = out.join(PAIR_COUNTS);
    let mut w = create(&path)?;
    run.table.write_dump(&mut w)?;
    finish(w, &path)?;
    let path = out.join(METRICS);
    let mut w = create(&path)?;
    metrics::write_metrics_dump(&run.metrics, &mut w)?;
    finish(w, &path)?;
    let path = out.join(EVENTS_JSONL);
    let mut w = create(&path)?;
    detect::write_events_jsonl(&run.events, &mut w)?;
    finish(w, &path)?;
    let path = out.join(EVENTS_CSV);
    let mut w = create(&path)?;
    detect::write_events_csv(&run.events, &mut w)?;
    finish(w, &path)?;
    write_json(
        out,
        DETECT_SUMMARY,
        &DetectSummary {
            schema_version: SCHEMA_VERSION,
            window,
            counting: cfg.counting,
            ingest: cfg.ingest,
            params: cfg.params,
            pair_count: run.table.len(),
            global_median: run.global_median,
            event_count: run.events.len(),
            annual_citations: run.table.annual_citations.clone(),
            classification: classification.clone(),
        },
    )?;

    println!(
        "detect: {} papers, {} edges, {} surviving pairs over {window}",
        run.stats.paper_count,
        run.stats.edge_count,
        run.table.len()
    );
    match run.global_median {
        Some(m) => println!("detect: global median z = {m}, {} events", run.events.len()),
        None => println!("detect: no surviving pairs, 0 events"),
    }
    if let Some(c) = classification {
        println!(
            "detect: {} cross-cluster ({}), {} intra-cluster",
            c.cross_cluster,
            c.cross_share.as_deref().unwrap_or("n/a"),
            c.intra_cluster
        );
    }
    Ok(())
}

/// Detection outputs, checked against the requested window.
fn load_detection(cfg: &RunConfig, out: &Path) -> anyhow::Result<(DetectSummary, Vec<CyicEvent>)> {
    let summary: DetectSummary = read_json(out, DETECT_SUMMARY, "detect")?;
    if let Some(w) = cfg.window {
        if w != summary.window {
            return Err(CliError::Config(format!(
                "--window {w} differs from the detection window {}",
                summary.window
            ))
            .into());
        }
    }
    let events = detect::read_events_jsonl(open_prior(out, EVENTS_JSONL, "detect")?)
        .with_context(|| format!("parsing {}", out.join(EVENTS_JSONL).display()))?;
    if events.len() != summary.event_count {
        return Err(CliError::Stale {
            file: out.join(EVENTS_JSONL),
            other: out.join(DETECT_SUMMARY),
            reason: format!("{} events listed, {} recorded", events.len(), summary.event_count),
        }
        .into());
    }
    Ok((summary, events))
}

pub fn segment(cfg: &RunConfig) -> anyhow::Result<()> {
    let out = cfg.out_dir()?;
    let map = load_map(cfg)?;
    let (summary, mut events) = load_detection(cfg, out)?;
    taxonomy::classify_events(&mut events, &map)?;
    let activity = phase::annual_activity(&events, &map, summary.window, &summary.annual_citations)?;
    let segmentation = phase::detect_turning_points(&activity, &cfg.rules)?;
    let growth = phase::growth_stats(&activity, &segmentation);
    for g in &growth {
        println!(
            "segment: period {} {}-{}: {} cross-cluster events, {}/year{}",
            g.label,
            g.start,
            g.end,
            g.total_events,
            g.per_year,
            g.change_vs_previous
                .as_ref()
                .map(|c| format!(", {c} vs previous"))
                .unwrap_or_default()
        );
    }
    write_json(
        out,
        SEGMENTATION,
        &SegmentationFile {
            schema_version: SCHEMA_VERSION,
            window: summary.window,
            rules: cfg.rules,
            activity,
            segmentation,
            growth,
        },
    )
}

/// Penultimate and last period unless named explicitly.
fn delta_periods(cfg: &RunConfig, seg: &PhaseSegmentation) -> (String, String) {
    let labels: Vec<&str> = seg.periods.iter().map(|p| p.label.as_str()).collect();
    let last = labels[labels.len() - 1];
    let before = labels[labels.len().saturating_sub(2)];
    (
        cfg.report.period_a.clone().unwrap_or_else(|| before.to_string()),
        cfg.report.period_b.clone().unwrap_or_else(|| last.to_string()),
    )
}

pub fn report(cfg: &RunConfig) -> anyhow::Result<()> {
    let out = cfg.out_dir()?;
    let map = load_map(cfg)?;
    let (summary, mut events) = load_detection(cfg, out)?;
    let seg_file: SegmentationFile = read_json(out, SEGMENTATION, "segment")?;
    if seg_file.window != summary.window {
        return Err(CliError::Stale {
            file: out.join(SEGMENTATION),
            other: out.join(DETECT_SUMMARY),
            reason: format!("window {} vs {}", seg_file.window, summary.window),
        }
        .into());
    }
    let seg = seg_file.segmentation;
    let window = summary.window;
    taxonomy::classify_events(&mut events, &map)?;

    let rankings = report::rank_clusters(&events, &seg, &map)?;
    let rank_dir = out.join(RANKINGS_DIR);
    if rank_dir.exists() {
        std::fs::remove_dir_all(&rank_dir).with_context(|| format!("clearing {}", rank_dir.display()))?;
    }
    ensure_dir(&rank_dir)?;
    for r in &rankings {
        let path = rank_dir.join(format!("period_{}.csv", r.period));
        let mut w = create(&path)?;
        r.write_csv(&mut w)?;
        finish(w, &path)?;
    }
    write_json(
        out,
        RANKINGS,
        &RankingBundle {
            schema_version: SCHEMA_VERSION,
            rankings: rankings.clone(),
        },
    )?;

    let (pa, pb) = delta_periods(cfg, &seg);
    let exclude: &[&str] = if cfg.report.include_general.unwrap_or(false) {
        &[]
    } else {
        &[GENERAL_CLUSTER]
    };
    let delta = report::delta_matrix(&events, &seg, &pa, &pb, &map, exclude)?;
    let path = out.join(DELTA_CSV);
    let mut w = create(&path)?;
    delta.write_csv(&mut w)?;
    finish(w, &path)?;
    write_json(out, DELTA_JSON, &delta)?;

    let k = cfg.report.top_k.unwrap_or(3);
    let focal: Vec<String> = match &cfg.report.focal {
        Some(f) => f.clone(),
        None => taxonomy::clusters_in_use(&map, &events)?
            .into_iter()
            .map(str::to_string)
            .collect(),
    };
    let timelines = focal
        .iter()
        .map(|f| report::partner_timeline(&events, f, k, &map, window))
        .collect::<Result<Vec<_>, _>>()?;
    write_json(
        out,
        PARTNER_TIMELINE,
        &PartnerBundle {
            schema_version: SCHEMA_VERSION,
            timelines,
        },
    )?;

    let publications = match &cfg.papers {
        Some(p) => report::cluster_publications(&PaperIndex::from_path(p, cfg.ingest)?, &map, window),
        None => BTreeMap::new(),
    };
    let timeline = report::export_timeline(&events, &publications, &map, window)?;
    write_json(out, TIMELINE, &timeline)?;

    for r in &rankings {
        let top: Vec<String> = r
            .rows
            .iter()
            .take(3)
            .map(|row| format!("{} {}", row.cluster, row.count))
            .collect();
        println!(
            "report: period {} ({} events, {}/year): {}",
            r.period,
            r.unique_events,
            r.per_year,
            if top.is_empty() {
                "-".to_string()
            } else {
                top.join(", ")
            }
        );
    }
    println!(
        "report: delta matrix {} -> {} over {} clusters, {} partner timelines",
        delta.period_a,
        delta.period_b,
        delta.clusters.len(),
        focal.len()
    );
    Ok(())
}

pub fn simulate(cfg: &RunConfig, scenario: Option<&PathBuf>) -> anyhow::Result<()> {
    let path = scenario
        .or(cfg.scenario.as_ref())
        .ok_or_else(|| CliError::Config("--scenario is required".into()))?;
    let out = cfg.out_dir()?;
    let mut sc = Scenario::load(path)?;
    if let Some(seed) = cfg.seed {
        sc.seed = seed;
    }
    let manifest = synth::generate_to_dir(&sc, out)?;
    println!(
        "simulate: {} papers, {} edges, {} subjects in {} clusters, {} planted events -> {}",
        manifest.paper_count,
        manifest.edge_count,
        manifest.subject_count,
        manifest.cluster_count,
        manifest.planted_events.len(),
        out.display()
    );
    Ok(())
}
