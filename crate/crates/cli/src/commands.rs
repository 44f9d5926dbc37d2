use std::fmt;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use roundness_core::negtype::supremal_p_unchecked;
use roundness_core::{
    compression_lower_bound, cycle, default_threshold, free_group_ball, generalized_roundness,
    gns_embed, gon_deficiency, grid, halfspace_embedding, hypercube, is_negative_type, load_graph,
    lp_sample, parse_edge_list, path, power_transform, search_violation, theta_classes,
    verify_isometry, zn_ball, EuclideanConfiguration, Exec, FiniteMetricSpace, GonConfiguration,
    Graph, IsometryReport, PStarResult, SearchOptions, Strategy, ViolationCertificate,
};
use serde::{Deserialize, Serialize};

use crate::output::{
    csv_with_manifest, load_graph_file, load_space, read_input, write_json, write_text, ResultFile,
    RunManifest, SpaceOutput, SummaryRow,
};
use crate::{CurveArgs, GenFamily, GenOutput, GnsArgs, GrArgs, L1Args, SearchArgs, SweepArgs};

/// A check on the output failed after it was computed.
#[derive(Debug)]
pub struct ValidationFailure(pub String);

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValidationFailure {}

fn space_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GrReport {
    pub space_id: String,
    pub n_points: usize,
    /// `p*/2`, a lower bound on equivariant Hilbert space compression.
    pub compression_lower_bound: f64,
    #[serde(flatten)]
    pub roundness: PStarResult,
}

pub fn gr(args: &GrArgs) -> Result<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("gr", args, Some(args.seed));
    let space = load_space(&args.space, args.force, &mut manifest)?;
    let (tol, p_max) = (args.bisection.tol, args.bisection.pmax);
    let roundness = if args.force {
        supremal_p_unchecked(&space, tol, p_max)?
    } else {
        generalized_roundness(&space, tol, p_max)?
    };
    let runtime_ms = start.elapsed().as_millis();
    manifest.runtime_ms = runtime_ms;

    let report = GrReport {
        space_id: space_id(&args.space),
        n_points: space.len(),
        compression_lower_bound: compression_lower_bound(roundness.p_star)?,
        roundness,
    };
    if let Some(csv_path) = &args.csv {
        let row = SummaryRow {
            space_id: report.space_id.clone(),
            n_points: report.n_points,
            p_star: Some(report.roundness.p_star),
            capped: Some(report.roundness.capped),
            tol,
            p_max,
            runtime_ms: Some(runtime_ms),
            seed: args.seed,
        };
        write_text(Some(csv_path), &csv_with_manifest(&manifest, &[row])?)?;
    }
    write_json(args.output.as_ref(), &ResultFile { manifest, result: report })
}

pub fn search(args: &SearchArgs) -> Result<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("search", args, Some(args.seed));
    let space = load_space(&args.space, args.force, &mut manifest)?;
    let opts = SearchOptions {
        strategy: args.strategy.parse::<Strategy>()?,
        budget: args.budget,
        max_n: args.max_n,
        seed: args.seed,
        workers: args.workers,
        exec: Exec::Parallel,
    };
    let found: Option<ViolationCertificate> = search_violation(&space, args.p, &opts)?;
    manifest.runtime_ms = start.elapsed().as_millis();
    write_json(args.output.as_ref(), &ResultFile { manifest, result: found })
}

fn write_edge_list(path: &Path, graph: &Graph) -> Result<()> {
    let mut text = String::new();
    for (u, v) in graph.edges() {
        text.push_str(&format!("{u} {v}\n"));
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn gen(family: &GenFamily, out: &GenOutput) -> Result<()> {
    let start = Instant::now();
    let seed = match family {
        GenFamily::Lp { seed, .. } => Some(*seed),
        _ => None,
    };
    let mut manifest = RunManifest::new("gen", family, seed);
    let (graph, space): (Option<Graph>, FiniteMetricSpace) = match family {
        GenFamily::Zn { rank, radius } => with_graph(zn_ball(*rank, *radius)?),
        GenFamily::Free { rank, radius } => with_graph(free_group_ball(*rank, *radius)?),
        GenFamily::Hypercube { n } => with_graph(hypercube(*n)?),
        GenFamily::Grid { dims } => with_graph(grid(dims)?),
        GenFamily::Cycle { n } => with_graph(cycle(*n)?),
        GenFamily::Path { n } => with_graph(path(*n)?),
        GenFamily::Lp { p, dim, count, seed } => (None, lp_sample(*dim, *count, *p, *seed)?),
        GenFamily::Graph { edges } => {
            let bytes = read_input(edges, &mut manifest)?;
            let text = String::from_utf8(bytes).context("edge list is not UTF-8")?;
            let parsed = parse_edge_list(&text).with_context(|| format!("parsing {}", edges.display()))?;
            with_graph(load_graph(&parsed)?)
        }
    };
    manifest.runtime_ms = start.elapsed().as_millis();
    if let Some(edges_path) = &out.edges_out {
        match &graph {
            Some(g) => write_edge_list(edges_path, g)?,
            None => bail!("--edges-out needs a graph family"),
        }
    }
    let file = SpaceOutput { labels: space.labels(), dist: space.rows(), manifest: &manifest };
    write_json(out.output.as_ref(), &file)
}

fn with_graph((g, s): (Graph, FiniteMetricSpace)) -> (Option<Graph>, FiniteMetricSpace) {
    (Some(g), s)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HyperplaneClass {
    pub id: usize,
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VertexVector {
    pub vertex: String,
    /// Class ids where the indicator vector is 1.
    pub support: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct L1Report {
    pub basepoint: usize,
    pub basepoint_label: String,
    pub dimension: usize,
    pub classes: Vec<HyperplaneClass>,
    pub vectors: Vec<VertexVector>,
    pub isometry: IsometryReport,
}

pub fn embed_l1(args: &L1Args) -> Result<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("embed l1", args, None);
    let (graph, space) = load_graph_file(&args.graph, &mut manifest)?;
    let hps = theta_classes(&graph)?;
    let emb = halfspace_embedding(&graph, &hps, args.basepoint)?;
    let isometry = verify_isometry(&emb, &space)?;
    manifest.runtime_ms = start.elapsed().as_millis();

    let labels = graph.labels();
    let classes = (0..hps.len())
        .map(|h| HyperplaneClass {
            id: h,
            edges: hps
                .class(h)
                .iter()
                .map(|&e| {
                    let (u, v) = hps.edges()[e];
                    (labels[u].clone(), labels[v].clone())
                })
                .collect(),
        })
        .collect();
    let vectors = emb
        .support
        .iter()
        .zip(labels)
        .map(|(s, l)| VertexVector { vertex: l.clone(), support: s.clone() })
        .collect();
    let passed = isometry.passed;
    let report = L1Report {
        basepoint: emb.basepoint,
        basepoint_label: labels[emb.basepoint].clone(),
        dimension: emb.dimension,
        classes,
        vectors,
        isometry,
    };
    write_json(args.output.as_ref(), &ResultFile { manifest, result: report })?;
    if !passed {
        return Err(ValidationFailure("half-space embedding is not an isometry".into()).into());
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GnsReport {
    pub p: f64,
    pub labels: Vec<String>,
    pub reconstruction_error: f64,
    #[serde(flatten)]
    pub configuration: EuclideanConfiguration,
}

pub fn embed_gns(args: &GnsArgs) -> Result<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("embed gns", args, None);
    let space = load_space(&args.space, args.force, &mut manifest)?;
    let kernel = power_transform(&space, args.p)?;
    let configuration = gns_embed(&kernel, args.basepoint, default_threshold(&kernel))
        .with_context(|| format!("d^{} on {}", args.p, args.space.display()))?;
    manifest.runtime_ms = start.elapsed().as_millis();
    let report = GnsReport {
        p: args.p,
        labels: space.labels().to_vec(),
        reconstruction_error: configuration.reconstruction_error(&kernel),
        configuration,
    };
    write_json(args.output.as_ref(), &ResultFile { manifest, result: report })
}

fn sweep_space(family: &str, rank: usize, r: usize) -> (String, roundness_core::Result<FiniteMetricSpace>) {
    let (id, built) = match family {
        "zn" => (format!("zn-rank{rank}-radius{r}"), zn_ball(rank, r)),
        "free" => (format!("free-rank{rank}-radius{r}"), free_group_ball(rank, r)),
        "hypercube" => (format!("hypercube-{r}"), hypercube(r)),
        _ => (format!("grid-{rank}x{r}"), grid(&vec![r; rank])),
    };
    (id, built.map(|(_, s)| s))
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("sweep", args, Some(args.seed));
    if !matches!(args.family.as_str(), "zn" | "free" | "hypercube" | "grid") {
        bail!(ValidationFailure(format!(
            "unknown sweep family {:?}; expected zn, free, hypercube or grid",
            args.family
        )));
    }
    if args.to < args.from {
        bail!(ValidationFailure(format!("empty range {}..={}", args.from, args.to)));
    }
    let radii: Vec<usize> = (args.from..=args.to).collect();
    let (tol, p_max) = (args.bisection.tol, args.bisection.pmax);
    // Rows come back in radius order whatever order workers finish in.
    let rows = Exec::Parallel.map_slice(&radii, |&r| {
        let started = Instant::now();
        let (id, built) = sweep_space(&args.family, args.rank, r);
        let n_points = built.as_ref().map_or(0, |s| s.len());
        let outcome = built.and_then(|space| generalized_roundness(&space, tol, p_max));
        let runtime = started.elapsed().as_millis();
        match outcome {
            Ok(res) => (
                SummaryRow {
                    space_id: id,
                    n_points,
                    p_star: Some(res.p_star),
                    capped: Some(res.capped),
                    tol,
                    p_max,
                    runtime_ms: Some(runtime),
                    seed: args.seed,
                },
                None,
            ),
            Err(e) => (
                SummaryRow {
                    space_id: id,
                    n_points,
                    p_star: None,
                    capped: None,
                    tol,
                    p_max,
                    runtime_ms: None,
                    seed: args.seed,
                },
                Some(e.to_string()),
            ),
        }
    });
    for (row, err) in &rows {
        if let Some(e) = err {
            eprintln!("warning: {}: {e}", row.space_id);
        }
    }
    manifest.runtime_ms = start.elapsed().as_millis();
    let rows: Vec<SummaryRow> = rows.into_iter().map(|(row, _)| row).collect();
    write_text(args.output.as_ref(), &csv_with_manifest(&manifest, &rows)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub p: f64,
    /// Deficiency of the fixed configuration, or of the worst violation
    /// found (empty when none).
    pub deficiency: Option<f64>,
    pub extremal_value: f64,
    pub negative_type: bool,
}

pub fn curve(args: &CurveArgs) -> Result<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("curve", args, None);
    let space = load_space(&args.space, args.force, &mut manifest)?;
    if !(args.step > 0.0) || !(args.pmax > 0.0) {
        bail!(ValidationFailure("--step and --pmax must be positive".into()));
    }
    let config = if args.a.is_empty() {
        None
    } else {
        Some(GonConfiguration::new(args.a.clone(), args.b.clone())?)
    };
    let steps = (args.pmax / args.step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (1..=steps).map(|k| k as f64 * args.step).collect();
    let rows = Exec::Parallel.map_slice(&grid, |&p| -> Result<CurveRow> {
        let kernel = power_transform(&space, p)?;
        let cert = is_negative_type(&kernel, default_threshold(&kernel))?;
        let deficiency = match &config {
            Some(c) => Some(gon_deficiency(&space, c, p)?),
            None => {
                let opts = SearchOptions {
                    strategy: Strategy::Exhaustive,
                    max_n: args.max_n,
                    budget: 1,
                    exec: Exec::Sequential,
                    ..Default::default()
                };
                search_violation(&space, p, &opts)?.map(|c| c.deficiency)
            }
        };
        Ok(CurveRow { p, deficiency, extremal_value: cert.extremal_value, negative_type: cert.is_negative_type })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    manifest.runtime_ms = start.elapsed().as_millis();
    write_text(args.output.as_ref(), &csv_with_manifest(&manifest, &rows)?)
}
