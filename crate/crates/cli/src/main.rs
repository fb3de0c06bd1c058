//! `graphonlab` command-line tool.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use graphonlab::bipartite::{bip_bound_check, bip_exact_density, bip_mc_density, bip_prefix_law_exact, bip_t, bip_t_ind, bip_t_inj, sample_bip_w_random, BipartiteSource};
use graphonlab::canon::enumerate_unlabelled;
use graphonlab::cut::cut_distance_upper;
use graphonlab::density::{mc_t, mc_t_inj_ind, metric_d, sampling_bound_check, t, t_ind, t_inj, tau_plus, DensityVector, DEFAULT_ALPHA};
use graphonlab::directed::{directed_bound_check, directed_extremality_test, directed_prefix_law_empirical, directed_t, directed_t_ind, directed_t_inj, kernel_t, kernel_t_ind, sample_directed, tournament_kernel, DirectedSource};
use graphonlab::exchangeable::{exchangeability_test, extremality_test, martingale_trace, prefix_law_empirical, ExtremalityReport, Verdict};
use graphonlab::graphon::{exact_density, exact_induced_density, mc_density, sample_w_random};
use graphonlab::rational::{format_exact, format_places, Rational};
use graphonlab::rng::{chunked, stream};
use graphonlab::{bipartite::bip_prefix_law_empirical, io, Error, Result};

const PLACES: usize = 12;

#[derive(Parser)]
#[command(name = "graphonlab", version, about = "Graph limits, W-random graphs and exchangeability tests")]
struct Cli {
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true, env = "GRAPHONLAB_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(short = 'o', long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Simple,
    Bipartite,
    Directed,
}

#[derive(Subcommand)]
enum Command {
    /// t, t_inj and t_ind of patterns in hosts or kernels, as CSV.
    Density {
        #[arg(short = 'F', long = "pattern", required = true)]
        patterns: Vec<PathBuf>,
        #[arg(short = 'G', long = "host")]
        hosts: Vec<PathBuf>,
        /// Step graphon, bipartite kernel or quintuple, depending on --kind.
        #[arg(short = 'W', long = "kernel")]
        kernels: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "simple")]
        kind: Kind,
        /// Monte Carlo with this many samples instead of exact counting.
        #[arg(long, visible_alias = "mc")]
        samples: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Draws one random graph from a kernel.
    Sample {
        #[arg(short = 'W', long = "kernel")]
        kernel: Option<PathBuf>,
        /// Random tournament instead of a kernel file (directed only).
        #[arg(long)]
        tournament: bool,
        #[arg(long, value_enum, default_value = "simple")]
        kind: Kind,
        #[arg(short = 'n', long)]
        n: Option<usize>,
        #[arg(long)]
        n1: Option<usize>,
        #[arg(long)]
        n2: Option<usize>,
    },
    /// Distance d between density embeddings of a graph sequence and a reference.
    Converge {
        graphs: Vec<PathBuf>,
        #[arg(long, conflicts_with = "reference_graphon")]
        reference_graph: Option<PathBuf>,
        #[arg(long)]
        reference_graphon: Option<PathBuf>,
        /// Patterns on at most this many vertices enter the embedding.
        #[arg(long, default_value_t = 4)]
        max_k: usize,
    },
    /// Isomorphism-invariance test of an empirical prefix law.
    TestExchangeable {
        #[command(flatten)]
        src: SourceArgs,
        #[arg(short = 'k', long, default_value_t = 3)]
        k: usize,
        /// Column count of a bipartite prefix.
        #[arg(long, default_value_t = 2)]
        k2: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Product-criterion test for extreme laws on pattern pairs.
    TestExtreme {
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Upper bound on the cut distance of two step graphons.
    Cutdist {
        #[arg(short = 'A')]
        first: PathBuf,
        #[arg(short = 'B')]
        second: PathBuf,
    },
    /// t_ind(F, H|n) along one nested sample.
    TraceMartingale {
        #[arg(long)]
        src: PathBuf,
        #[arg(short = 'F', long = "pattern")]
        pattern: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<usize>,
    },
}

#[derive(clap::Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Source spec: `<weight> const <p>` / `<weight> file <graphon>` lines.
    #[arg(long)]
    src: Option<PathBuf>,
    /// Directed source from a quintuple file.
    #[arg(long)]
    quintuple: Option<PathBuf>,
    /// Bipartite source from a kernel file.
    #[arg(long)]
    bipartite_kernel: Option<PathBuf>,
}

struct Report {
    text: String,
    rejected: bool,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, rejected: false }
    }
}

fn id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn exact(r: &Rational) -> String {
    format_places(r, PLACES)
}

fn approx(x: f64) -> String {
    format!("{x:.PLACES$}")
}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

fn density(patterns: &[PathBuf], hosts: &[PathBuf], kernels: &[PathBuf], kind: Kind, samples: Option<u64>, alpha: f64, seed: u64) -> Result<Report> {
    if hosts.is_empty() && kernels.is_empty() {
        return usage("density needs at least one --host or --kernel");
    }
    let mut out = String::new();
    match samples {
        None => out.push_str("pattern_id,host_id,t,t_inj,t_ind,bound_ok\n"),
        Some(_) => out.push_str("pattern_id,host_id,t,t_inj,t_ind,halfwidth\n"),
    }
    let mut rng = stream(seed, 0);
    let mut row = |p: &Path, h: &Path, vals: [String; 4]| {
        let _ = writeln!(out, "{},{},{},{},{},{}", id(p), id(h), vals[0], vals[1], vals[2], vals[3]);
    };
    for pf in patterns {
        match kind {
            Kind::Simple => {
                let f = io::read_graph(pf)?;
                for hf in hosts {
                    let g = io::read_graph(hf)?;
                    match samples {
                        None => {
                            let ok = sampling_bound_check(&f, &g)?.ok;
                            row(pf, hf, [exact(&t(&f, &g)?), exact(&t_inj(&f, &g)?), exact(&t_ind(&f, &g)?), ok.to_string()]);
                        }
                        Some(n) => {
                            let a = mc_t(&f, &g, n, alpha, &mut rng)?;
                            let (b, c) = mc_t_inj_ind(&f, &g, n, alpha, &mut rng)?;
                            row(pf, hf, [approx(a.point), approx(b.point), approx(c.point), approx(a.confidence_halfwidth)]);
                        }
                    }
                }
                for wf in kernels {
                    let w = io::read_step_graphon(wf)?;
                    match samples {
                        None => {
                            let d = exact(&exact_density(&f, &w)?);
                            row(pf, wf, [d.clone(), d, exact(&exact_induced_density(&f, &w)?), "true".into()]);
                        }
                        Some(n) => {
                            let a = mc_density(&f, &w, n, alpha, &mut rng)?;
                            let k = f.n();
                            let hits = chunked(
                                &mut rng,
                                n,
                                Ok(0u64),
                                |r, len| {
                                    let mut h = 0;
                                    for _ in 0..len {
                                        h += (sample_w_random(&w, k, r)? == f) as u64;
                                    }
                                    Ok(h)
                                },
                                |x: Result<u64>, y| Ok(x? + y?),
                            )?;
                            let d = approx(a.point);
                            row(pf, wf, [d.clone(), d, approx(hits as f64 / n as f64), approx(a.confidence_halfwidth)]);
                        }
                    }
                }
            }
            Kind::Bipartite => {
                let f = io::read_bipartite_graph(pf)?;
                for hf in hosts {
                    if samples.is_some() {
                        return usage("Monte Carlo is available for bipartite kernels only");
                    }
                    let g = io::read_bipartite_graph(hf)?;
                    let ok = bip_bound_check(&f, &g)?.ok;
                    row(pf, hf, [exact(&bip_t(&f, &g)?), exact(&bip_t_inj(&f, &g)?), exact(&bip_t_ind(&f, &g)?), ok.to_string()]);
                }
                for wf in kernels {
                    let w = io::read_bipartite_kernel(wf)?;
                    match samples {
                        None => {
                            let d = exact(&bip_exact_density(&f, &w)?);
                            let law = bip_prefix_law_exact(&w, f.n1(), f.n2())?;
                            let ind = law.exact_prob(&f).expect("exact law");
                            row(pf, wf, [d.clone(), d, exact(&ind), "true".into()]);
                        }
                        Some(n) => {
                            let a = bip_mc_density(&f, &w, n, alpha, &mut rng)?;
                            let law = bip_prefix_law_empirical(&BipartiteSource::Kernel(w), f.n1(), f.n2(), n, &mut rng)?;
                            let d = approx(a.point);
                            row(pf, wf, [d.clone(), d, approx(law.prob(&f)), approx(a.confidence_halfwidth)]);
                        }
                    }
                }
            }
            Kind::Directed => {
                if samples.is_some() {
                    return usage("Monte Carlo is not available for directed graphs");
                }
                let f = io::read_directed_graph(pf)?;
                for hf in hosts {
                    let g = io::read_directed_graph(hf)?;
                    let ok = directed_bound_check(&f, &g)?.ok;
                    row(pf, hf, [exact(&directed_t(&f, &g)?), exact(&directed_t_inj(&f, &g)?), exact(&directed_t_ind(&f, &g)?), ok.to_string()]);
                }
                for wf in kernels {
                    let w = io::read_quintuple(wf)?;
                    let d = exact(&kernel_t(&f, &w)?);
                    row(pf, wf, [d.clone(), d, exact(&kernel_t_ind(&f, &w)?), "true".into()]);
                }
            }
        }
    }
    Ok(Report::ok(out))
}

fn sample(kernel: Option<&Path>, tournament: bool, kind: Kind, n: Option<usize>, n1: Option<usize>, n2: Option<usize>, seed: u64) -> Result<Report> {
    let mut rng = stream(seed, 0);
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| Error::Input(format!("sample needs {flag}")));
    let file = || kernel.ok_or_else(|| Error::Input("sample needs --kernel".into()));
    let text = match kind {
        Kind::Simple => io::format_graph(&sample_w_random(&io::read_step_graphon(file()?)?, need(n, "-n")?, &mut rng)?),
        Kind::Bipartite => {
            let w = io::read_bipartite_kernel(file()?)?;
            io::format_bipartite_graph(&sample_bip_w_random(&w, need(n1, "--n1")?, need(n2, "--n2")?, &mut rng)?)
        }
        Kind::Directed => {
            let k = match (tournament, kernel) {
                (true, None) => tournament_kernel(),
                (false, Some(p)) => io::read_quintuple(p)?,
                _ => return usage("directed sampling needs exactly one of --kernel and --tournament"),
            };
            io::format_directed_graph(&sample_directed(&k, need(n, "-n")?, &mut rng)?)
        }
    };
    Ok(Report::ok(text))
}

fn converge(graphs: &[PathBuf], reference_graph: Option<&Path>, reference_graphon: Option<&Path>, max_k: usize) -> Result<Report> {
    if graphs.is_empty() {
        return usage("converge needs at least one graph file");
    }
    let en = Arc::new(enumerate_unlabelled(max_k)?);
    let reference = match (reference_graph, reference_graphon) {
        (Some(p), _) => Some(tau_plus(&io::read_graph(p)?, &en)?),
        (_, Some(p)) => {
            let w = io::read_step_graphon(p)?;
            let values = en.iter().map(|f| Ok(graphonlab::rational::to_f64(&exact_density(f.graph(), &w)?))).collect::<Result<Vec<_>>>()?;
            Some(DensityVector::new(en.clone(), values, Some(0.0))?)
        }
        (None, None) => None,
    };
    let mut out = String::new();
    let mut prev: Option<DensityVector> = None;
    for p in graphs {
        let g = io::read_graph(p)?;
        let v = tau_plus(&g, &en)?;
        match &reference {
            Some(r) => {
                let _ = writeln!(out, "METRIC d_reference graph={} n={} value={}", id(p), g.n(), approx(metric_d(&v, r)?));
            }
            None => {
                if let Some(q) = &prev {
                    let _ = writeln!(out, "METRIC d_previous graph={} n={} value={}", id(p), g.n(), approx(metric_d(&v, q)?));
                }
            }
        }
        prev = Some(v);
    }
    Ok(Report::ok(out))
}

fn verdict_line(v: &Verdict, pass: &str, fail: &str) -> String {
    match v {
        Verdict::Consistent { p_min } => format!("VERDICT {pass} p_min={p_min}\n"),
        Verdict::Rejected { p_min, detail } => format!("VERDICT {fail} p_min={p_min}\nDETAIL {detail}\n"),
    }
}

fn test_exchangeable(src: &SourceArgs, k: usize, k2: usize, samples: u64, alpha: f64, seed: u64) -> Result<Report> {
    let mut rng = stream(seed, 0);
    let verdict = if let Some(p) = &src.src {
        exchangeability_test(&prefix_law_empirical(&io::read_source(p)?, k, samples, &mut rng)?, alpha)?
    } else if let Some(p) = &src.quintuple {
        let s = DirectedSource::kernel(io::read_quintuple(p)?)?;
        exchangeability_test(&directed_prefix_law_empirical(&s, k, samples, &mut rng)?, alpha)?
    } else {
        let p = src.bipartite_kernel.as_ref().expect("clap enforces one source");
        let s = BipartiteSource::Kernel(io::read_bipartite_kernel(p)?);
        exchangeability_test(&bip_prefix_law_empirical(&s, k, k2, samples, &mut rng)?, alpha)?
    };
    let rejected = !verdict.is_consistent();
    Ok(Report { text: verdict_line(&verdict, "exchangeable-consistent", "non-exchangeable"), rejected })
}

fn test_extreme(src: &SourceArgs, pairs: &Path, samples: u64, alpha: f64, seed: u64) -> Result<Report> {
    let mut rng = stream(seed, 0);
    let pairs = io::read_pairs(pairs)?;
    let report: ExtremalityReport = if let Some(p) = &src.src {
        extremality_test(&io::read_source(p)?, &pairs, samples, alpha, &mut rng)?
    } else if let Some(p) = &src.quintuple {
        directed_extremality_test(&DirectedSource::kernel(io::read_quintuple(p)?)?, &pairs, samples, alpha, &mut rng)?
    } else {
        return usage("test-extreme takes --src or --quintuple");
    };
    let mut out = String::from("pair,p_a,p_b,p_both,diff,std_err,z,p_value\n");
    for (i, t) in report.pairs.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            i + 1,
            approx(t.p_a),
            approx(t.p_b),
            approx(t.p_both),
            approx(t.diff),
            approx(t.std_err),
            approx(t.z),
            t.p_value
        );
    }
    out += &verdict_line(&report.verdict, "extreme-consistent", "non-extreme");
    Ok(Report { text: out, rejected: !report.verdict.is_consistent() })
}

fn cutdist(a: &Path, b: &Path) -> Result<Report> {
    let d = cut_distance_upper(&io::read_step_graphon(a)?, &io::read_step_graphon(b)?)?;
    Ok(Report::ok(format!("METRIC cut_distance_upper value={} exact={}\n", exact(&d), format_exact(&d))))
}

fn trace(src: &Path, pattern: &Path, grid: &[usize], seed: u64) -> Result<Report> {
    let mut rng = stream(seed, 0);
    let values = martingale_trace(&io::read_source(src)?, &io::read_graph(pattern)?, grid, &mut rng)?;
    let mut out = String::from("n,t_ind\n");
    for (n, v) in grid.iter().zip(values) {
        let _ = writeln!(out, "{n},{}", approx(v));
    }
    Ok(Report::ok(out))
}

fn run(cli: &Cli) -> Result<Report> {
    let seed = cli.seed;
    match &cli.command {
        Command::Density { patterns, hosts, kernels, kind, samples, alpha } => density(patterns, hosts, kernels, *kind, *samples, *alpha, seed),
        Command::Sample { kernel, tournament, kind, n, n1, n2 } => sample(kernel.as_deref(), *tournament, *kind, *n, *n1, *n2, seed),
        Command::Converge { graphs, reference_graph, reference_graphon, max_k } => {
            converge(graphs, reference_graph.as_deref(), reference_graphon.as_deref(), *max_k)
        }
        Command::TestExchangeable { src, k, k2, samples, alpha } => test_exchangeable(src, *k, *k2, *samples, *alpha, seed),
        Command::TestExtreme { src, pairs, samples, alpha } => test_extreme(src, pairs, *samples, *alpha, seed),
        Command::Cutdist { first, second } => cutdist(first, second),
        Command::TraceMartingale { src, pattern, grid } => trace(src, pattern, grid, seed),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::Precondition(_) => 2,
        Error::Capacity(_) => 3,
        Error::Invariant(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        Some(t) => pool = pool.num_threads(t),
        None => {}
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(4);
        }
    };
    let result = pool.install(|| run(&cli));
    match result {
        Ok(report) => {
            let written = match &cli.output {
                Some(p) => fs::write(p, &report.text).map_err(|e| format!("{}: {e}", p.display())),
                None => {
                    print!("{}", report.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(report.rejected as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
