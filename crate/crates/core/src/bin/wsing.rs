use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::process::ExitCode;
use wsing::approx::{best_approx_sequence, r_of, ApproxTarget};
use wsing::counting::{all_points_count, mobius_primitive_count, primitive_density};
use wsing::dimension::{closed_form_dim, cover_relation};
use wsing::flow::{di_profile, shift_of, systole_profile_shift};
use wsing::lattice::DEFAULT_CAP;
use wsing::report::{num, round_to, to_csv, to_json};
use wsing::tree::{
    build_tree, check_contained, check_invariants, sample_points, verify_cardinality, verify_separation, TreeParams,
};
use wsing::{Box3, Error, LatticeRep, Weight};

#[derive(Parser, Debug)]
#[command(name = "wsing", version, about = "Weighted singular vectors: approximations, flows, trees, counting, dimension")]
struct Cli {
    /// Seed for any sampled output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weighted best approximations of x up to qmax.
    /// CSV columns: p1,p2,q,quality,exact
    BestApprox {
        /// Target "a,b"; rationals like 1/3 stay exact.
        #[arg(long)]
        x: String,
        #[arg(long)]
        w: String,
        #[arg(long)]
        qmax: i64,
    },
    /// Shortest vector of a_t h(x) Z^3 over a grid of t.
    /// CSV columns: t,systole,p1,p2,q
    Systole {
        #[arg(long)]
        x: String,
        #[arg(long)]
        w: String,
        #[command(flatten)]
        grid: Grid,
    },
    /// Dirichlet-improvability test over a list of T.
    /// CSV columns: T,holds,p1,p2,q
    Di {
        #[arg(long)]
        x: String,
        #[arg(long)]
        w: String,
        #[arg(long)]
        eps: f64,
        /// Comma separated values of T.
        #[arg(long = "T", value_delimiter = ',', required = true)]
        big_t: Vec<f64>,
    },
    /// Build the self-affine tree and print one node per line.
    /// CSV columns (no header): level,q,p1,p2,tau1,tau2,lo1,hi1,lo2,hi2,parent
    TreeBuild(TreeArgs),
    /// Build the tree and run its invariant, cardinality, separation and containment checks.
    /// CSV columns: check,pass,detail
    TreeVerify {
        #[command(flatten)]
        tree: TreeArgs,
        /// Seeded points per leaf to report alongside the checks.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        /// Leaves used by the containment check.
        #[arg(long, default_value_t = 64)]
        contained_points: usize,
    },
    /// Count points of a lattice in the box K.
    /// CSV columns: mode,count,theta,ratio
    Count {
        /// Half-widths "r1,r2,r3".
        #[arg(long)]
        k: String,
        #[arg(long, value_enum, default_value_t = CountMode::Primitive)]
        mode: CountMode,
        /// With --w, --et and --x count in a_t h(x) Z^3 instead of Z^3.
        #[arg(long)]
        w: Option<String>,
        #[arg(long)]
        et: Option<f64>,
        #[arg(long)]
        x: Option<String>,
    },
    /// Hausdorff dimension 2 - 1/(1 + w1) of the w-singular vectors.
    /// CSV columns: dim,degenerate,exact
    Dim {
        #[arg(long)]
        w: String,
    },
    /// The cover relation D(u, eps) and E(u, v, eps) up to vmax.
    /// CSV columns: p1,p2,q,e_count,e_sum
    Cover {
        /// Integer vector "p1,p2,q".
        #[arg(long)]
        u: String,
        #[arg(long)]
        w: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 5000)]
        vmax: i64,
        /// Exponent of the partial sums.
        #[arg(long, default_value_t = 2.5)]
        t: f64,
    },
}

#[derive(Args, Debug)]
struct Grid {
    #[arg(long, default_value_t = 0.0)]
    tmin: f64,
    #[arg(long, default_value_t = 5.0)]
    tmax: f64,
    #[arg(long, default_value_t = 50)]
    steps: usize,
}

#[derive(Args, Debug)]
struct TreeArgs {
    #[arg(long)]
    w: String,
    /// e^t, given directly.
    #[arg(long)]
    et: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.2)]
    r: f64,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Keep only sons passing the shortest-dual-vector filter.
    #[arg(long)]
    refined: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CountMode {
    Primitive,
    All,
    Mobius,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write_stdout(&e.to_string());
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let line = msg
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join(" ");
            eprintln!("{line}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(text) => {
            let res = match &cli.output {
                Some(p) => std::fs::write(p, text.as_bytes()),
                None => write_stdout(&text),
            };
            match res {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: cannot write output: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::CapacityExceeded { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

/// A closed pipe downstream is not an error.
fn write_stdout(text: &str) -> std::io::Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

fn weight(s: &str) -> Result<Weight, Error> {
    Weight::parse_allow_degenerate(s)
}

fn triple_f(s: &str) -> Result<[f64; 3], Error> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad number '{p}'"))))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| Error::InvalidInput(format!("expected three components, got '{s}'")))
}

fn triple_i(s: &str) -> Result<[i64; 3], Error> {
    let v: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>().map_err(|_| Error::InvalidInput(format!("bad integer '{p}'"))))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| Error::InvalidInput(format!("expected three components, got '{s}'")))
}

fn lines(mut v: Vec<String>) -> String {
    v.push(String::new());
    v.join("\n")
}

fn envelope(command: &str, params: Value, result: Value) -> String {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("params".into(), params);
    m.insert("result".into(), result);
    lines(vec![to_json(&Value::Object(m))])
}

fn val<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn tree_params(a: &TreeArgs) -> Result<TreeParams, Error> {
    let w = Weight::parse(&a.w)?;
    let p = TreeParams::new(w, a.et, a.eps, a.r, a.depth);
    p.validate()?;
    Ok(p)
}

fn tree_json(a: &TreeArgs, p: &TreeParams) -> Value {
    json!({"w": p.w, "et": a.et, "eps": a.eps, "r": a.r, "depth": a.depth, "refined": a.refined, "cap": p.cap})
}

fn run(cli: &Cli) -> Result<String, Error> {
    let common = json!({"seed": cli.seed, "format": format!("{:?}", cli.format).to_lowercase()});
    let with = |extra: Value| {
        let mut m = common.as_object().cloned().unwrap_or_default();
        if let Value::Object(e) = extra {
            m.extend(e);
        }
        Value::Object(m)
    };
    let csv = cli.format == Format::Csv;
    match &cli.command {
        Command::BestApprox { x, w, qmax } => {
            let wt = Weight::parse(w)?;
            let target = ApproxTarget::parse(x)?;
            let seq = best_approx_sequence(&target, &wt, *qmax)?;
            if csv {
                let rows = seq
                    .records
                    .iter()
                    .map(|r| vec![r.u.p1.to_string(), r.u.p2.to_string(), r.u.q.to_string(), num(r.quality), r.exact.to_string()])
                    .collect::<Vec<_>>();
                return Ok(to_csv(Some(&["p1", "p2", "q", "quality", "exact"]), &rows));
            }
            let params = with(json!({"x": x, "w": wt, "qmax": qmax}));
            Ok(envelope("best-approx", params, val(&seq)))
        }
        Command::Systole { x, w, grid } => {
            let wt = Weight::parse(w)?;
            let target = ApproxTarget::parse(x)?;
            if grid.steps == 0 || !(grid.tmax >= grid.tmin) {
                return Err(Error::InvalidInput("need steps >= 1 and tmax >= tmin".into()));
            }
            let ts: Vec<f64> = (0..=grid.steps)
                .map(|i| grid.tmin + (grid.tmax - grid.tmin) * i as f64 / grid.steps as f64)
                .collect();
            let s = systole_profile_shift(shift_of(&target), &wt, &ts, DEFAULT_CAP)?;
            if csv {
                let rows = (0..ts.len())
                    .map(|i| {
                        let m = s.witnesses[i];
                        vec![num(ts[i]), num(s.values[i]), m.p1.to_string(), m.p2.to_string(), m.q.to_string()]
                    })
                    .collect::<Vec<_>>();
                return Ok(to_csv(Some(&["t", "systole", "p1", "p2", "q"]), &rows));
            }
            let params = with(json!({"x": x, "w": wt, "tmin": grid.tmin, "tmax": grid.tmax, "steps": grid.steps}));
            Ok(envelope("systole", params, val(&s)))
        }
        Command::Di { x, w, eps, big_t } => {
            let wt = Weight::parse(w)?;
            let target = ApproxTarget::parse(x)?;
            let p = di_profile(&target, &wt, *eps, big_t)?;
            if csv {
                let rows = (0..big_t.len())
                    .map(|i| {
                        let (a, b, c) = p.witnesses[i].map_or((String::new(), String::new(), String::new()), |m| {
                            (m.p1.to_string(), m.p2.to_string(), m.q.to_string())
                        });
                        vec![num(big_t[i]), p.results[i].to_string(), a, b, c]
                    })
                    .collect::<Vec<_>>();
                return Ok(to_csv(Some(&["T", "holds", "p1", "p2", "q"]), &rows));
            }
            let params = with(json!({"x": x, "w": wt, "eps": eps, "T": big_t}));
            Ok(envelope("di", params, val(&p)))
        }
        Command::TreeBuild(a) => {
            let p = tree_params(a)?;
            let tree = build_tree(&p, a.refined)?;
            if csv {
                return Ok(lines(tree.export_lines().into_iter().map(|l| l.replace('\t', ",")).collect()));
            }
            let mut out = Vec::new();
            for (lvl, nodes) in tree.levels.iter().enumerate() {
                for nd in nodes {
                    let mut o = json!({
                        "level": lvl,
                        "q": nd.q,
                        "p": nd.p,
                        "tau": nd.tau_f64(),
                        "beta": nd.beta.bounds(),
                        "parent": nd.parent,
                    });
                    if lvl == 0 {
                        o["params"] = with(tree_json(a, &p));
                    }
                    out.push(to_json(&o));
                }
            }
            Ok(lines(out))
        }
        Command::TreeVerify { tree: a, samples, contained_points } => {
            let p = tree_params(a)?;
            let tree = build_tree(&p, a.refined)?;
            let inv = check_invariants(&tree);
            let card = verify_cardinality(&tree);
            let sep = verify_separation(&tree);
            let cont = check_contained(&tree, *contained_points, 16)?;
            let pts = sample_points(&tree, *samples, cli.seed);
            if csv {
                let rows = vec![
                    vec!["invariants".into(), inv.passed().to_string(), format!("nodes={}", inv.nodes)],
                    vec![
                        "cardinality".into(),
                        (card.outside_window == 0).to_string(),
                        format!("outside_window={}", card.outside_window),
                    ],
                    vec![
                        "separation".into(),
                        sep.violations.is_empty().to_string(),
                        format!("pairs={} violations={}", sep.pairs_checked, sep.violations.len()),
                    ],
                    vec![
                        "contained".into(),
                        cont.violations.is_empty().to_string(),
                        format!("points={} worst_ratio={}", cont.points, num(cont.worst_ratio)),
                    ],
                ];
                return Ok(to_csv(Some(&["check", "pass", "detail"]), &rows));
            }
            let result = json!({
                "level_counts": tree.level_counts(),
                "invariants": {"passed": inv.passed(), "report": val(&inv)},
                "cardinality": val(&card),
                "separation": val(&sep),
                "contained": val(&cont),
                "samples": pts,
            });
            let mut params = with(tree_json(a, &p));
            params["samples"] = json!(samples);
            params["contained_points"] = json!(contained_points);
            Ok(envelope("tree-verify", params, result))
        }
        Command::Count { k, mode, w, et, x } => {
            let r = triple_f(k)?;
            let kb = Box3::new(r[0], r[1], r[2])?;
            let lat = match (w, et, x) {
                (None, None, None) => LatticeRep::standard(),
                (Some(w), Some(et), Some(x)) => {
                    let wt = Weight::parse(w)?;
                    if !(*et >= 1.0 && et.is_finite()) {
                        return Err(Error::InvalidInput(format!("e^t must be at least 1, got {et}")));
                    }
                    LatticeRep::flow(&wt, et.ln(), shift_of(&ApproxTarget::parse(x)?))
                }
                _ => return Err(Error::InvalidInput("--w, --et and --x go together".into())),
            };
            let (count, theta, ratio, extra) = match mode {
                CountMode::Primitive => {
                    let d = primitive_density(&kb, &lat)?;
                    let (c, th, ra) = (d.report.count, d.report.theta, d.report.ratio);
                    (c, th, ra, val(&d))
                }
                CountMode::All => {
                    let c = all_points_count(&kb, &lat)?;
                    (c.count, c.theta, c.ratio, val(&c))
                }
                CountMode::Mobius => {
                    let c = mobius_primitive_count(&kb, &lat)?;
                    let th = kb.volume() / lat.covolume();
                    (c, th, c as f64 / th, json!({"count": c, "theta": th}))
                }
            };
            if csv {
                let mode_s = format!("{mode:?}").to_lowercase();
                let rows = vec![vec![mode_s, count.to_string(), num(theta), num(ratio)]];
                return Ok(to_csv(Some(&["mode", "count", "theta", "ratio"]), &rows));
            }
            let params = with(json!({"k": r, "mode": mode, "w": w, "et": et, "x": x}));
            Ok(envelope("count", params, extra))
        }
        Command::Dim { w } => {
            let wt = weight(w)?;
            let d = closed_form_dim(&wt);
            let dim = round_to(d.dim, 10);
            if csv {
                let rows = vec![vec![num(dim), d.degenerate.to_string(), d.exact.clone().unwrap_or_default()]];
                return Ok(to_csv(Some(&["dim", "degenerate", "exact"]), &rows));
            }
            let mut m = Map::new();
            m.insert("dim".into(), json!(dim));
            m.insert("degenerate".into(), json!(d.degenerate));
            m.insert("exact".into(), json!(d.exact));
            m.insert("params".into(), with(json!({"w": wt})));
            Ok(lines(vec![to_json(&Value::Object(m))]))
        }
        Command::Cover { u, w, eps, vmax, t } => {
            let wt = Weight::parse(w)?;
            let m = wsing::IntTriple::from_array(triple_i(u)?);
            if !m.is_primitive() || m.q <= 1 {
                return Err(Error::InvalidInput(format!("u must be primitive with q > 1, got {u}")));
            }
            if !(*eps > 0.0 && *eps < 1.0) || *vmax < m.q {
                return Err(Error::InvalidInput("need 0 < eps < 1 and vmax >= q".into()));
            }
            let rep = cover_relation(m, &wt, *eps, *vmax)?;
            let es = rep.e_sums(*t);
            if csv {
                let rows = rep
                    .d_set
                    .iter()
                    .zip(&rep.e_sets)
                    .zip(&es)
                    .map(|((v, e), s)| vec![v.p1.to_string(), v.p2.to_string(), v.q.to_string(), e.len().to_string(), num(*s)])
                    .collect::<Vec<_>>();
                return Ok(to_csv(Some(&["p1", "p2", "q", "e_count", "e_sum"]), &rows));
            }
            let r = r_of(m, &wt)?;
            let result = json!({
                "u_prime": rep.u_prime,
                "r_u": rep.r_u,
                "r_u_times_q": r.value * m.q as f64,
                "normal": rep.normal,
                "d_count": rep.d_set.len(),
                "d_sum": rep.d_sum(*t),
                "e_count": rep.e_sets.iter().map(Vec::len).sum::<usize>(),
                "e_sum_total": es.iter().fold(0.0, |a, b| a + b),
                "e_sum_max": es.iter().cloned().fold(0.0, f64::max),
            });
            let params = with(json!({"u": m, "w": wt, "eps": eps, "vmax": vmax, "t": t}));
            Ok(envelope("cover", params, result))
        }
    }
}
