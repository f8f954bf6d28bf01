//! One runner per subcommand. Each returns the campaign's CSV table, its
//! JSON summary and any extra export files; nothing is written here.

use crate::config::{Config, ConfigError};
use crate::RunError;
use fppdt::fpp::campaign::{
    concentration_from, sample_passage_times, shape_deviation, subadditivity_from, time_constant_from, truncation_gap,
    variance_scaling, FppSetup, TRUNCATION_DELTA,
};
use fppdt::fpp::{count_geodesics, path_weight, point_passage_time};
use fppdt::geometry::{build_delaunay, build_voronoi_dual, io, sample_poisson, PointSet, Window};
use fppdt::paths::{cheap_path_scan, count_table, min_animal_scan, walk_length_scan};
use fppdt::percolation::{
    duality_probe, estimate_pc_star, eta_curve, GoodBoxVariant, PercolationSetup, ThresholdEstimate,
};
use fppdt::renorm::{animal_growth_scan, greedy_animal, good_box_density_probe, AnimalMode, GoodBoxParams, SiteField, SiteLaw};
use fppdt::runner::replicate;
use fppdt::seed::{derive_seed, AUX, POINTS, WEIGHTS};
use fppdt::stats::Summary;
use fppdt::weights::{assign_weights, WeightDistribution};
use fppdt::geometry::Point;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub const COMMANDS: [&str; 13] =
    ["gen", "triangulate", "fpp", "mu", "fluct", "shape", "perc", "pcstar", "renorm", "animals", "paths", "kappa", "truncgap"];

/// Keys every command accepts.
const COMMON: [&str; 2] = ["seed", "threads"];

pub struct Output {
    pub csv: Table,
    pub summary: Value,
    /// `(file suffix, contents)`, written as `<command>.<suffix>`.
    pub extra: Vec<(String, String)>,
    /// Replica count and the streams each replica draws from, for the manifest.
    pub replicas: usize,
    pub streams: Vec<&'static str>,
}

/// CSV table with a fixed header.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

fn f(x: f64) -> String {
    x.to_string()
}

fn s(x: impl ToString) -> String {
    x.to_string()
}

fn keys(config: &Config, own: &[&str]) -> Result<(), ConfigError> {
    let all: Vec<&str> = COMMON.iter().chain(own).copied().collect();
    config.check_keys(&all)
}

fn positive(name: &str, x: f64) -> Result<f64, ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError(format!("{name} must be positive, got {x}")))
    }
}

fn replicas(config: &Config, default: usize) -> Result<usize, ConfigError> {
    let r = config.get("replicas", default)?;
    if r == 0 {
        return Err(ConfigError("replicas must be at least 1".into()));
    }
    Ok(r)
}

fn dist(config: &Config) -> Result<WeightDistribution, RunError> {
    Ok(config.get("dist", "exponential(1)".to_string())?.parse::<WeightDistribution>()?)
}

/// Square window; the margin defaults to `side / 8` unless `margin` is given.
fn fpp_setup_with(config: &Config, side: f64, margin: Option<f64>) -> Result<FppSetup, ConfigError> {
    let side = positive("side", config.get("side", side)?)?;
    let mut setup = FppSetup::square(side);
    setup.margin = config.get("margin", margin.unwrap_or(setup.margin))?;
    setup.intensity = positive("intensity", config.get("intensity", 1.0)?)?;
    setup.freeze_points = config.get("freeze_points", false)?;
    Ok(setup)
}

fn fpp_setup(config: &Config, side: f64) -> Result<FppSetup, ConfigError> {
    fpp_setup_with(config, side, None)
}

const FPP_KEYS: [&str; 5] = ["side", "margin", "intensity", "freeze_points", "dist"];

fn point_pair(config: &Config, key: &str, default: Point) -> Result<Point, ConfigError> {
    let v = config.list::<f64>(key, &[default.x, default.y])?;
    match v.as_slice() {
        [x, y] => Ok(Point::new(*x, *y)),
        _ => Err(ConfigError(format!("{key} needs two coordinates"))),
    }
}

pub fn run(command: &str, config: &Config, seed: u64) -> Result<Output, RunError> {
    match command {
        "gen" => gen(config, seed),
        "triangulate" => triangulate(config, seed),
        "fpp" => fpp(config, seed),
        "mu" => mu(config, seed),
        "fluct" => fluct(config, seed),
        "shape" => shape(config, seed),
        "perc" => perc(config, seed),
        "pcstar" => pcstar(config, seed),
        "renorm" => renorm(config, seed),
        "animals" => animals(config, seed),
        "paths" => paths(config, seed),
        "kappa" => kappa(config, seed),
        "truncgap" => truncgap(config, seed),
        other => Err(RunError::Config(format!("unknown command {other:?}"))),
    }
}

fn sample_points(config: &Config, seed: u64) -> Result<PointSet, RunError> {
    let side = positive("side", config.get("side", 64.0)?)?;
    let margin = config.get("margin", side / 8.0)?;
    let intensity = positive("intensity", config.get("intensity", 1.0)?)?;
    let w = Window::square(side, margin)?;
    Ok(sample_poisson(&w, intensity, derive_seed(seed, 0, POINTS))?)
}

fn gen(config: &Config, seed: u64) -> Result<Output, RunError> {
    keys(config, &["side", "margin", "intensity"])?;
    let ps = sample_points(config, seed)?;
    let mut csv = Table::new(&["index", "x", "y"]);
    for (i, p) in ps.points().iter().enumerate() {
        csv.push(vec![s(i), f(p.x), f(p.y)]);
    }
    let w = ps.window();
    Ok(Output {
        csv,
        summary: json!({ "points": ps.len(), "window": { "lo": [w.lo.x, w.lo.y], "hi": [w.hi.x, w.hi.y], "margin": w.margin } }),
        extra: vec![("points".into(), io::write_points(&ps))],
        replicas: 1,
        streams: vec![POINTS],
    })
}

fn triangulate(config: &Config, seed: u64) -> Result<Output, RunError> {
    keys(config, &["side", "margin", "intensity", "input"])?;
    let ps = match config.raw("input") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{path}: {e}")))?;
            io::read_points(&text)?
        }
        None => sample_points(config, seed)?,
    };
    let g = build_delaunay(&ps)?;
    let d = build_voronoi_dual(&g, ps.window());
    let mut csv = Table::new(&["edge", "i", "j", "interior"]);
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        csv.push(vec![s(e), s(i), s(j), s(u8::from(g.is_interior_edge(e)))]);
    }
    Ok(Output {
        csv,
        summary: json!({
            "vertices": g.num_vertices(),
            "edges": g.num_edges(),
            "triangles": g.triangles().len(),
            "euler_characteristic": g.euler_characteristic(),
            "voronoi_vertices": d.vertices().len(),
        }),
        extra: vec![("graph".into(), io::write_graph(&g))],
        replicas: 1,
        streams: vec![POINTS],
    })
}

fn fpp(config: &Config, seed: u64) -> Result<Output, RunError> {
    keys(config, &["side", "margin", "intensity", "dist", "from", "to"])?;
    let setup = fpp_setup(config, 64.0)?;
    let dist = dist(config)?;
    let window = setup.window()?;
    let ps = sample_poisson(&window, setup.intensity, derive_seed(seed, 0, POINTS))?;
    let g = build_delaunay(&ps)?;
    let x = assign_weights(&g, &dist, derive_seed(seed, 0, WEIGHTS))?;
    let d = build_voronoi_dual(&g, &window);
    let (a, b) = setup.endpoints((setup.side - 2.0 * setup.margin) / 2.0);
    let (from, to) = (point_pair(config, "from", a)?, point_pair(config, "to", b)?);
    let r = point_passage_time(&from, &to, &d, &g, &x)?;
    let (u, v) = (r.geodesic[0], *r.geodesic.last().unwrap());
    let count = match count_geodesics(&g, &x, u, v, 2, 5_000_000) {
        Ok(k) => Some(k),
        Err(fppdt::Error::BoundExceeded(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut csv = Table::new(&["step", "vertex", "x", "y", "T"]);
    for (k, &w) in r.geodesic.iter().enumerate() {
        let p = g.points()[w];
        csv.push(vec![s(k), s(w), f(p.x), f(p.y), f(path_weight(&g, &x, &r.geodesic[..=k])?)]);
    }
    Ok(Output {
        csv,
        summary: json!({
            "distribution": dist.to_string(),
            "from": [from.x, from.y],
            "to": [to.x, to.y],
            "time": r.time,
            "geodesic": r.geodesic,
            "geodesics_up_to_2": count,
        }),
        extra: vec![],
        replicas: 1,
        streams: vec![POINTS, WEIGHTS],
    })
}

fn passage_csv(grid: &[usize], times: &[Vec<f64>], seed: u64) -> Table {
    let mut csv = Table::new(&["n", "replica", "T", "seed"]);
    for (k, &n) in grid.iter().enumerate() {
        for (r, t) in times[k].iter().enumerate() {
            csv.push(vec![s(n), s(r), f(*t), s(derive_seed(seed, r as u64, POINTS))]);
        }
    }
    csv
}

fn mu(config: &Config, seed: u64) -> Result<Output, RunError> {
    keys(config, &[&FPP_KEYS[..], &["n", "replicas"]].concat())?;
    let setup = fpp_setup(config, 320.0)?;
    let dist = dist(config)?;
    let grid = config.list::<usize>("n", &[16, 32, 64, 128])?;
    let reps = replicas(config, 200)?;
    let samples = sample_passage_times(&setup, &dist, &grid, reps, seed)?;
    let csv = passage_csv(&grid, &samples.times, seed);
    let tc = time_constant_from(samples.clone());
    let sub = grid.iter().any(|&n| grid.contains(&(2 * n))).then(|| subadditivity_from(samples));
    Ok(Output {
        csv,
        summary: json!({
            "distribution": dist.to_string(),
            "setup": setup,
            "grid": tc.grid,
            "per_n": tc.per_n,
            "mu_hat": tc.mu_hat,
            "mu_hat_ci_excludes_zero": tc.mu_hat.ci_low() > 0.0,
            "nonincreasing_within_2ci": tc.nonincreasing_within_2ci,
            "subadditivity": sub.map(|c| json!({ "pairs": c.pairs })),
        }),
        extra: vec![],
        replicas: reps,
        streams: vec![POINTS, WEIGHTS],
    })
}

fn fluct(config: &Config, seed: u64) -> Result<Output, RunError> {
    keys(config, &[&FPP_KEYS[..], &["n", "replicas", "kappa", "r"]].concat())?;
    let setup = fpp_setup(config, 384.0)?;
    let dist = dist(config)?;
    let grid = config.list::<usize>("n", &[16, 32, 64, 128, 256])?;
    let reps = replicas(config, 300)?;
    let kappa = config.get("kappa", 0.75)?;
    let r_grid = config.list::<f64>("r", &[0.25, 0.5, 1.0, 2.0])?;
    if !(kappa > 0.5 && kappa <= 1.0) {
        return Err(RunError::Config(format!("kappa must lie in (1/2, 1], got {kappa}")));
    }
    let v = variance_scaling(&setup, &dist, &grid, reps, seed)?;
    let csv = passage_csv(&grid, &v.samples.times, seed);
    let k = (0..grid.len()).max_by_key(|&k| grid[k]).unwrap();
    let conc = concentration_from(grid[k], kappa, &r_grid, v.samples.times[k].clone());
    Ok(Output {
        csv,
        summary: json!({
            "distribution": dist.to_string(),
            "setup": setup,
            "grid": v.grid,
            "variance": v.variance,
            "variance_ci_half_width": v.variance_ci_half_width,
            "fit": v.fit,
            "concentration": {
                "n": conc.n, "kappa": conc.kappa, "nu": conc.nu, "nu_alt": conc.nu_alt,
                "r": conc.r_grid, "exceedance": conc.exceedance,
                "reference": conc.reference, "reference_alt": conc.reference_alt,
            },
        }),
        extra: vec![],
        replicas: reps,
        streams: vec![POINTS, WEIGHTS],
    })
}

fn shape(config: &Config, seed: u64) -> Result<Output, RunError> {
    keys(config, &[&FPP_KEYS[..], &["t", "kappa", "mu", "rays", "replicas"]].concat())?;
    // The growth ball at t = 128 needs a half-width near 800 when μ ≈ 0.21.
    let setup = fpp_setup_with(config, 1700.0, Some(32.0))?;
    let dist = dist(config)?;
    let t_grid = config.list::<f64>("t", &[32.0, 64.0, 128.0])?;
    let kappa = config.get("kappa", 0.75)?;
    let mu_hat = positive("mu", config.require("mu")?)?;
    let rays = config.get("rays", 64usize)?;
    let reps = replicas(config, 100)?;
    let sd = shape_deviation(&setup, &dist, &t_grid, kappa, mu_hat, rays, reps, seed)?;
    let mut csv = Table::new(&["t", "replica", "ray", "radius", "in_band"]);
    for (k, &t) in t_grid.iter().enumerate() {
        let (lo, hi) = ((t - t.powf(kappa)) / mu_hat, (t + t.powf(kappa)) / mu_hat);
        for (r, row) in sd.radii[k].iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                csv.push(vec![f(t), s(r), s(j), f(x), s(u8::from(x >= lo && x <= hi))]);
            }
        }
    }
    Ok(Output {
        csv,
        summary: json!({
            "distribution": dist.to_string(),
            "setup": setup,
            "t": sd.t_grid, "kappa": sd.kappa, "mu_hat": sd.mu_hat, "rays": sd.rays,
            "in_band": sd.in_band,
        }),
        extra: vec![],
        replicas: reps,
        streams: vec![POINTS, WEIGHTS],
    })
}

fn perc_setup(config: &Config, r: f64) -> Result<PercolationSetup, ConfigError> {
    let mut setup = PercolationSetup::new(positive("R", r)?);
    setup.intensity = positive("intensity", config.get("intensity", 1.0)?)?;
    Ok(setup)
}

fn perc(config: &Config, seed: u64) -> Result<Output, RunError> {
    keys(config, &["R", "p", "replicas", "intensity"])?;
    let rs = config.list::<f64>("R", &[16.0])?;
    let default_p: Vec<f64> = (0..=10).map(|k| f64::from(k) / 10.0).collect();
    let ps = config.list::<f64>("p", &default_p)?;
    let reps = replicas(config, 400)?;
    let mut csv = Table::new(&["p", "R", "replica", "crossed", "seed"]);
    let mut curves = Vec::new();
    for &r in &rs {
        let c = eta_curve(&perc_setup(config, r)?, &ps, reps, seed)?;
        for (k, &p) in ps.iter().enumerate() {
            for (i, &x) in c.crossed[k].iter().enumerate() {
                csv.push(vec![f(p), f(r), s(i), s(u8::from(x)), s(derive_seed(seed, i as u64, POINTS))]);
            }
        }
        curves.push(json!({ "R": r, "p": c.p_grid, "eta": c.eta, "violations": c.violations, "geometry_failures": c.geometry_failures }));
    }
    Ok(Output {
        csv,
        summary: json!({ "curves": curves }),
        extra: vec![],
        replicas: reps,
        streams: vec![POINTS, fppdt::seed::BONDS],
    })
}

fn threshold_json(t: &ThresholdEstimate) -> Value {
    json!({
        "lattice": t.lattice, "R": t.r, "replicas": t.replicas,
        "bracket": [t.lo, t.hi], "eta_lo": t.eta_lo, "eta_hi": t.eta_hi, "steps": t.steps,
        "midpoint": t.midpoint(), "median": t.median, "median_ci": [t.ci_low, t.ci_high],
    })
}

fn pcstar(config: &Config, seed: u64) -> Result<Output, RunError> {
    keys(config, &["R", "replicas", "tol", "duality", "intensity"])?;
    let rs = config.list::<f64>("R", &[16.0, 32.0])?;
    let reps = replicas(config, 400)?;
    let tol = config.get("tol", 0.01)?;
    let duality = config.get("duality", true)?;
    let mut csv = Table::new(&["R", "lattice", "replica", "critical", "seed"]);
    let mut out = Vec::new();
    let mut mids = Vec::new();
    let push = |csv: &mut Table, t: &ThresholdEstimate| {
        let name = format!("{:?}", t.lattice).to_lowercase();
        for (i, q) in t.critical.iter().enumerate() {
            csv.push(vec![f(t.r), name.clone(), s(i), f(*q), s(derive_seed(seed, i as u64, POINTS))]);
        }
    };
    for &r in &rs {
        let setup = perc_setup(config, r)?;
        if duality {
            let d = duality_probe(&setup, reps, tol, seed)?;
            push(&mut csv, &d.pc_star);
            push(&mut csv, &d.pc);
            mids.push(d.pc_star.midpoint());
            out.push(json!({
                "R": r,
                "pc_star": threshold_json(&d.pc_star),
                "pc": threshold_json(&d.pc),
                "duality": { "sum": d.sum, "combined_ci": d.combined_ci, "holds": d.holds },
            }));
        } else {
            let t = estimate_pc_star(&setup, reps, tol, seed)?;
            push(&mut csv, &t);
            mids.push(t.midpoint());
            out.push(json!({ "R": r, "pc_star": threshold_json(&t) }));
        }
    }
    let spread = mids.iter().copied().fold(f64::NEG_INFINITY, f64::max) - mids.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Output {
        csv,
        summary: json!({ "R": rs, "thresholds": out, "pc_star_midpoint_spread": spread }),
        extra: vec![],
        replicas: reps,
        streams: if duality { vec![POINTS, fppdt::seed::BONDS, AUX] } else { vec![POINTS, fppdt::seed::BONDS] },
    })
}

fn renorm(config: &Config, seed: u64) -> Result<Output, RunError> {
    keys(config, &["variant", "L", "grid", "p", "dist", "eps", "dependence", "intensity", "replicas"])?;
    let variant: GoodBoxVariant = config.get("variant", "Y".to_string())?.parse()?;
    let ls = config.list::<f64>("L", &[8.0, 16.0, 32.0])?;
    let reps = replicas(config, 100)?;
    let base = GoodBoxParams {
        variant,
        l: 1.0,
        grid: config.get("grid", 6i64)?,
        p: config.get("p", 0.9)?,
        dist: config.get("dist", "bernoulliAtom(0.1,1)".to_string())?.parse()?,
        eps: config.get("eps", 0.5)?,
        dependence: config.get("dependence", 3i64)?,
        intensity: positive("intensity", config.get("intensity", 1.0)?)?,
    };
    let mut csv = Table::new(&["L", "variant", "fraction_mean", "fraction_ci", "pooled", "correlation", "corr_ci_low", "corr_ci_high"]);
    let mut rows = Vec::new();
    for &l in &ls {
        let probe = good_box_density_probe(&GoodBoxParams { l, ..base.clone() }, reps, seed)?;
        let c = probe.correlation;
        csv.push(vec![
            f(l),
            variant.to_string(),
            f(probe.fraction.mean),
            f(probe.fraction.ci_half_width),
            f(probe.pooled.estimate),
            f(c.estimate),
            f(c.ci_low),
            f(c.ci_high),
        ]);
        rows.push(json!({ "L": l, "fraction": probe.fraction, "pooled": probe.pooled, "correlation": c }));
    }
    Ok(Output {
        csv,
        summary: json!({ "variant": variant.to_string(), "params": base, "rows": rows }),
        extra: vec![],
        replicas: reps,
        streams: vec![POINTS, fppdt::seed::BONDS, WEIGHTS],
    })
}

fn animals(config: &Config, seed: u64) -> Result<Output, RunError> {
    keys(config, &["law", "s", "replicas"])?;
    let law: SiteLaw = config.get("law", "poisson(1)".to_string())?.parse()?;
    let s_grid = config.list::<usize>("s", &[4, 5, 6, 7, 8, 9, 10])?;
    let reps = replicas(config, 100)?;
    let scan = animal_growth_scan(&law, &s_grid, reps, seed)?;
    let mut csv = Table::new(&["s", "replica", "ratio"]);
    for (k, &sz) in s_grid.iter().enumerate() {
        for (r, x) in scan.ratios[k].iter().enumerate() {
            csv.push(vec![s(sz), s(r), f(*x)]);
        }
    }
    // Replica 0's field, rebuilt from the same stream, gives a witness.
    let smax = *s_grid.iter().max().unwrap() as i64;
    let rad = smax - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, AUX));
    let field = SiteField::from_fn((-rad, -rad), (rad, rad), |_| law.sample(&mut rng))?;
    let witness = greedy_animal(&field, smax as usize, AnimalMode::Exact)?;
    Ok(Output {
        csv,
        summary: json!({
            "law": law.to_string(),
            "rows": scan.rows,
            "max_ratio_stabilizes": scan.max_ratio_stabilizes,
            "witness": { "replica": 0, "s": smax, "value": witness.value, "sites": witness.animal },
        }),
        extra: vec![],
        replicas: reps,
        streams: vec![AUX],
    })
}

fn paths(config: &Config, seed: u64) -> Result<Output, RunError> {
    keys(config, &["mode", "r", "z", "direction", "L", "dist", "c", "replicas"])?;
    let mode = config.get("mode", "walk".to_string())?;
    let reps = replicas(config, 100)?;
    let dir = point_pair(config, "direction", Point::new(1.0, 1.0))?;
    match mode.as_str() {
        "walk" => {
            let r_grid = config.list::<f64>("r", &[8.0, 16.0, 32.0, 64.0])?;
            let z_grid = config.list::<f64>("z", &[1.5, 2.0, 3.0])?;
            let scan = walk_length_scan(&r_grid, &z_grid, dir, reps, seed)?;
            let mut csv = Table::new(&["r", "replica", "vertices", "ratio"]);
            for (k, &r) in r_grid.iter().enumerate() {
                for (i, x) in scan.ratios[k].iter().enumerate() {
                    csv.push(vec![f(r), s(i), f((x * r).round()), f(*x)]);
                }
            }
            Ok(Output {
                csv,
                summary: json!({ "mode": mode, "direction": [dir.x, dir.y], "z": scan.z_grid, "rows": scan.rows }),
                extra: vec![],
                replicas: reps,
                streams: vec![POINTS],
            })
        }
        "animal" => {
            let r_grid = config.list::<usize>("r", &[2, 4, 6, 8])?;
            let l = positive("L", config.get("L", 2.0)?)?;
            let rows = min_animal_scan(&r_grid, l, dir, reps, seed)?;
            let mut csv = Table::new(&["r", "g_mean", "G_mean", "walk_ratio", "geodesic_ratio"]);
            let opt = |x: &Option<Summary>| x.map_or_else(String::new, |v| f(v.mean));
            for row in &rows {
                csv.push(vec![s(row.r), opt(&row.g), opt(&row.big_g), f(row.walk_ratio.mean), f(row.geodesic_ratio.mean)]);
            }
            Ok(Output {
                csv,
                summary: json!({ "mode": mode, "L": l, "direction": [dir.x, dir.y], "rows": rows }),
                extra: vec![],
                replicas: reps,
                streams: vec![POINTS, WEIGHTS],
            })
        }
        "cheap" => {
            let d = dist(config)?;
            let r_grid = config.list::<usize>("r", &[4, 5, 6, 7, 8])?;
            let c = config.get("c", 0.2)?;
            let scan = cheap_path_scan(&d, &r_grid, c, reps, seed)?;
            let mut csv = Table::new(&["r", "replica", "t"]);
            for (k, &r) in r_grid.iter().enumerate() {
                for (i, x) in scan.values[k].iter().enumerate() {
                    csv.push(vec![s(r), s(i), f(*x)]);
                }
            }
            Ok(Output {
                csv,
                summary: json!({ "mode": mode, "distribution": scan.distribution, "c": scan.c, "rows": scan.rows }),
                extra: vec![],
                replicas: reps,
                streams: vec![POINTS, WEIGHTS],
            })
        }
        other => Err(RunError::Config(format!("unknown paths mode {other:?} (walk, animal, cheap)"))),
    }
}

fn kappa(config: &Config, seed: u64) -> Result<Output, RunError> {
    keys(config, &["rmax", "replicas"])?;
    let rmax = config.get("rmax", 8usize)?;
    let reps = replicas(config, 20)?;
    let h = 3.0 * rmax as f64 + 16.0;
    let w = Window::new(Point::new(-h, -h), Point::new(h, h), 8.0)?;
    let tables = replicate(reps, |r| {
        let ps = sample_poisson(&w, 1.0, derive_seed(seed, r as u64, POINTS))?;
        let g = build_delaunay(&ps)?;
        let d = build_voronoi_dual(&g, &w);
        count_table(&g, d.nearest(&Point::new(0.0, 0.0)), rmax)
    })?;
    let mut csv = Table::new(&["replica", "r", "N_r", "kappa_r"]);
    for (i, t) in tables.iter().enumerate() {
        for c in t {
            csv.push(vec![s(i), s(c.r), s(c.count), c.kappa.map_or_else(String::new, f)]);
        }
    }
    let per_r: Vec<Value> = (1..=rmax)
        .map(|r| {
            let v: Vec<f64> = tables.iter().filter_map(|t| t[r].kappa).map(|k| k / r as f64).collect();
            json!({ "r": r, "log_count_per_step": Summary::of(&v) })
        })
        .collect();
    Ok(Output { csv, summary: json!({ "rmax": rmax, "rows": per_r }), extra: vec![], replicas: reps, streams: vec![POINTS] })
}

fn truncgap(config: &Config, seed: u64) -> Result<Output, RunError> {
    keys(config, &[&FPP_KEYS[..], &["n", "a", "delta", "replicas"]].concat())?;
    let setup = fpp_setup(config, 320.0)?;
    let dist = dist(config)?;
    let grid = config.list::<usize>("n", &[32, 64, 128])?;
    let a = config.get("a", 0.5)?;
    let delta = config.get("delta", TRUNCATION_DELTA)?;
    if !(delta > 0.0 && delta < 0.125) {
        return Err(RunError::Config(format!("delta must lie in (0, 1/8), got {delta}")));
    }
    let reps = replicas(config, 200)?;
    let mut csv = Table::new(&["n", "replica", "gap", "seed"]);
    let mut rows = Vec::new();
    for &n in &grid {
        let g = truncation_gap(&setup, &dist, n, a, delta, reps, seed)?;
        for (r, x) in g.gaps.iter().enumerate() {
            csv.push(vec![s(n), s(r), f(*x), s(derive_seed(seed, r as u64, POINTS))]);
        }
        rows.push(json!({ "n": n, "mean_square": g.mean_square, "nonzero": g.nonzero }));
    }
    Ok(Output {
        csv,
        summary: json!({ "distribution": dist.to_string(), "a": a, "delta": delta, "setup": setup, "rows": rows }),
        extra: vec![],
        replicas: reps,
        streams: vec![POINTS, WEIGHTS, AUX],
    })
}
