use std::path::Path;

use serde::{Deserialize, Serialize};
use torus_sr::adversarial::{
    bek_interval_lo, bek_supnorm_check, cube_mixture_pair, cube_mixture_pair_with, embed_cube_pair,
    embedding_identity_error, grid_pair, max_lb_infinite_diff, min_cross_distance, one_dim_pair,
    origin_margin, random_frequencies, random_separated_pair, CubePair, SeparatedConfig,
    SeparatedPair, MAX_TABULATED_DIM,
};
use torus_sr::bump::{build_q, verify_bump, verify_q, PropertyCheck, Regime};
use torus_sr::fourier::{comb_fourier, max_coeff_diff, perturb, table_of_capped, NoiseMode};
use torus_sr::metrics::{hh_distance, wasserstein, HHInterval, HHParams};
use torus_sr::recon::{default_params, reconstruct_distribution, reconstruct_signed, ParamOverrides, ReconParams};
use torus_sr::torus::random_comb;
use torus_sr::{DiracComb, FrequencyIndex, IndexSet};

use crate::{
    BumpArgs, CliError, Command, Construction, DistanceArgs, Envelope, ExperimentConfig, Format,
    GenArgs, Metric, NoiseArg, Outcome, ReconArgs, ReconMode, RegimeArg, ReportArgs, ReportKind,
    Side, VerifyArgs,
};

/// Cap on frequency tables built during verification.
const TABLE_CAP: usize = 1 << 20;
/// Largest product of support sizes sent to the transport LP.
const TRANSPORT_CAP: usize = 4096;
const EMBED_SAMPLES: usize = 200;

type Res<T> = Result<T, CliError>;

pub(crate) fn dispatch(config: &ExperimentConfig) -> Res<Outcome> {
    if config.format == Format::Csv && !matches!(config.command, Command::Report(_)) {
        return Err(CliError::Usage("--format csv is only available for `report`".into()));
    }
    match &config.command {
        Command::Gen(a) => gen(config, a),
        Command::Reconstruct(a) => reconstruct(config, a),
        Command::Distance(a) => distance(config, a),
        Command::Bump(a) => bump(config, a),
        Command::Verify(a) => verify(config, a),
        Command::Report(a) => report(config, a),
    }
}

fn json<T: Serialize>(config: &ExperimentConfig, result: &T) -> Res<Vec<u8>> {
    let env = Envelope {
        config: config.clone(),
        result,
    };
    let mut body = serde_json::to_vec_pretty(&env)?;
    body.push(b'\n');
    Ok(body)
}

// ---------------------------------------------------------------------------
// pairs

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairDetails {
    Grid { side: usize },
    Random(SeparatedPair),
    Onedim,
    Cube(CubePair),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairData {
    pub construction: Construction,
    /// Absent for cube pairs above the tabulation cap.
    pub first: Option<DiracComb>,
    pub second: Option<DiracComb>,
    pub details: PairDetails,
}

fn uniform(dim: usize, pts: &[torus_sr::TorusPoint]) -> Res<DiracComb> {
    let w = 1.0 / pts.len() as f64;
    Ok(DiracComb::new(dim, pts.to_vec(), vec![w; pts.len()])?)
}

fn separated_config(a: &GenArgs) -> Res<SeparatedConfig> {
    let base = SeparatedConfig::for_defaults(a.d, a.epsilon).ok();
    let pick = |name: &str, v: Option<f64>, b: Option<f64>| {
        v.or(b)
            .ok_or_else(|| CliError::Usage(format!("--{name} is required for these parameters")))
    };
    Ok(SeparatedConfig {
        m: pick("m", a.m.map(|x| x as f64), base.map(|c| c.m as f64))? as usize,
        n: pick("n", a.n.map(f64::from), base.map(|c| c.n as f64))? as u32,
        kappa: pick("kappa", a.kappa, base.map(|c| c.kappa))?,
    })
}

fn build_pair(a: &GenArgs, seed: u64) -> Res<PairData> {
    Ok(match a.construction {
        Construction::Grid => {
            let (first, second, side) = grid_pair(a.d, a.epsilon)?;
            PairData {
                construction: a.construction,
                first: Some(first),
                second: Some(second),
                details: PairDetails::Grid { side },
            }
        }
        Construction::Random => {
            let cfg = separated_config(a)?;
            let p = random_separated_pair(a.d, a.epsilon, seed, a.retries, Some(cfg))?;
            PairData {
                construction: a.construction,
                first: Some(uniform(a.d, &p.xs)?),
                second: Some(uniform(a.d, &p.ys)?),
                details: PairDetails::Random(p),
            }
        }
        Construction::Onedim => {
            if a.d != 1 {
                return Err(CliError::Usage("--construction onedim needs --d 1".into()));
            }
            let (first, second) = one_dim_pair(a.epsilon)?;
            PairData {
                construction: a.construction,
                first: Some(first),
                second: Some(second),
                details: PairDetails::Onedim,
            }
        }
        Construction::Cube => {
            let p = match a.k {
                Some(k) => cube_mixture_pair_with(a.d, a.epsilon, k)?,
                None => cube_mixture_pair(a.d, a.epsilon)?,
            };
            let (first, second) = if a.d <= MAX_TABULATED_DIM {
                let (x, y) = embed_cube_pair(&p)?;
                (Some(x), Some(y))
            } else {
                (None, None)
            };
            PairData {
                construction: a.construction,
                first,
                second,
                details: PairDetails::Cube(p),
            }
        }
    })
}

fn load_pair(path: &Path) -> Res<(GenArgs, PairData)> {
    let text = std::fs::read(path)?;
    let env: Envelope<PairData> = serde_json::from_slice(&text)?;
    match env.config.command {
        Command::Gen(args) => Ok((args, env.result)),
        _ => Err(CliError::Usage(format!("{} was not written by `gen`", path.display()))),
    }
}

fn pair_combs(p: &PairData) -> Res<(&DiracComb, &DiracComb)> {
    match (&p.first, &p.second) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(CliError::Usage("pair file has no explicit combs".into())),
    }
}

fn gen(config: &ExperimentConfig, a: &GenArgs) -> Res<Outcome> {
    let pair = build_pair(a, config.seed)?;
    let atoms = match (&pair.first, &pair.second) {
        (Some(x), Some(y)) => format!("{}+{} atoms", x.len(), y.len()),
        _ => "mixtures only".into(),
    };
    Ok(Outcome {
        body: json(config, &pair)?,
        summary: format!("gen {:?}: d={} epsilon={} ({atoms})", a.construction, a.d, a.epsilon),
        passed: true,
    })
}

// ---------------------------------------------------------------------------
// verification

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub measured: f64,
    pub relation: String,
    pub threshold: f64,
    pub passed: bool,
}

fn clause(name: &str, measured: f64, relation: &str, threshold: f64) -> Clause {
    let passed = match relation {
        "<=" => measured <= threshold,
        "<" => measured < threshold,
        ">=" => measured >= threshold,
        ">" => measured > threshold,
        _ => false,
    };
    Clause {
        name: name.into(),
        measured,
        relation: relation.into(),
        threshold,
        passed,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyResult {
    pub construction: Construction,
    pub clauses: Vec<Clause>,
    pub passed: bool,
}

fn find(clauses: &[Clause], name: &str) -> Option<f64> {
    clauses.iter().find(|c| c.name == name).map(|c| c.measured)
}

fn grid_clauses(first: &DiracComb, second: &DiracComb, side: usize, eps: f64) -> Res<Vec<Clause>> {
    let set = IndexSet::LinfBall {
        radius: side as u32 - 1,
    };
    let t1 = table_of_capped(first, set, TABLE_CAP)?;
    let t2 = table_of_capped(second, set, TABLE_CAP)?;
    let (_, diff) = max_coeff_diff(&t1, &t2)?;
    let mut out = vec![
        clause("max_fourier_diff", diff, "<=", 1e-10),
        clause(
            "min_cross_distance",
            min_cross_distance(first.points(), second.points()),
            ">=",
            eps * (1.0 - 1e-12),
        ),
    ];
    if first.len() * second.len() <= TRANSPORT_CAP {
        out.push(clause("wasserstein", wasserstein(first, second)?, ">=", eps - 1e-9));
    }
    Ok(out)
}

fn onedim_clauses(first: &DiracComb, second: &DiracComb, eps: f64, eps_dist: f64) -> Res<Vec<Clause>> {
    let (mut even, mut odd) = (0.0f64, 0.0f64);
    for l in -16i64..=16 {
        let li = FrequencyIndex(vec![l]);
        let d = (comb_fourier(first, &li)? - comb_fourier(second, &li)?).norm();
        if l % 2 == 0 {
            even = even.max(d);
        } else {
            odd = odd.max((d - 4.0 * eps).abs());
        }
    }
    let w = wasserstein(first, second)?;
    let hh = hh_distance(first, second, &HHParams::new(eps_dist))?;
    Ok(vec![
        clause("even_fourier_diff", even, "<=", 1e-12),
        clause("odd_fourier_diff_error", odd, "<=", 1e-12),
        clause("wasserstein_error", (w - eps).abs(), "<=", 1e-6),
        clause("hh_lower_error", (hh.lower - 2.0 * eps).abs(), "<=", 1e-6),
        clause("hh_upper_error", (hh.upper - 2.0 * eps).abs(), "<=", 1e-6),
    ])
}

fn random_clauses(p: &SeparatedPair) -> Res<Vec<Clause>> {
    let r = p.report()?;
    let (_, diff) = max_lb_infinite_diff(p)?;
    let kappa = p.config.kappa;
    Ok(vec![
        clause("min_cross_distance", r.min_cross_distance, ">", 4.0 * p.epsilon),
        clause("max_sum_x", r.max_sum_x, "<", kappa / 2.0),
        clause("max_sum_y", r.max_sum_y, "<", kappa / 2.0),
        clause("max_fourier_diff", diff, "<", kappa),
    ])
}

fn cube_clauses(
    p: &CubePair,
    combs: Option<(&DiracComb, &DiracComb)>,
    eps_dist: f64,
    seed: u64,
) -> Res<Vec<Clause>> {
    let eps = p.epsilon;
    let d = p.dim();
    let bek = bek_supnorm_check(&p.poly, bek_interval_lo(d, p.poly.k))?;
    let mut out = vec![
        clause("mu_mass_error", (p.mu.weights.iter().sum::<f64>() - 1.0).abs(), "<=", 1e-12),
        clause("nu_mass_error", (p.nu.weights.iter().sum::<f64>() - 1.0).abs(), "<=", 1e-12),
        clause("coefficient_l1_error", (p.poly.l1_norm() - 2.0).abs(), "<=", 1e-9),
        clause("coefficient_sum", p.poly.coefficient_sum().abs(), "<=", 1e-9),
        clause("factorization_error", p.poly.factorization_error(), "<=", 1e-9),
        clause("a0", p.poly.coefficients[0].abs(), ">=", 3.0 * eps),
        clause("bek_sup", bek.sup, "<=", bek.bound),
        clause("mass_gap", p.mass_gap().abs(), ">=", 2.0 * eps),
        clause("slack", p.slack(), "<=", eps),
    ];
    if let Some((a, b)) = combs {
        let ls = random_frequencies(d, EMBED_SAMPLES, 3, seed);
        let err = embedding_identity_error(&p.mu, a, &ls)?.max(embedding_identity_error(&p.nu, b, &ls)?);
        out.push(clause("embedding_identity_error", err, "<=", 1e-10));
        out.push(clause("origin_margin", origin_margin(a, b, eps_dist)?, ">", eps));
    }
    Ok(out)
}

fn pair_clauses(a: &GenArgs, pair: &PairData, eps_dist: f64, seed: u64) -> Res<Vec<Clause>> {
    match &pair.details {
        PairDetails::Grid { side } => {
            let (x, y) = pair_combs(pair)?;
            grid_clauses(x, y, *side, a.epsilon)
        }
        PairDetails::Onedim => {
            let (x, y) = pair_combs(pair)?;
            onedim_clauses(x, y, a.epsilon, eps_dist)
        }
        PairDetails::Random(p) => random_clauses(p),
        PairDetails::Cube(p) => {
            let combs = match (&pair.first, &pair.second) {
                (Some(x), Some(y)) => Some((x, y)),
                _ => None,
            };
            cube_clauses(p, combs, eps_dist, seed)
        }
    }
}

fn verify(config: &ExperimentConfig, a: &VerifyArgs) -> Res<Outcome> {
    let (gen_args, pair) = match &a.input {
        Some(path) => {
            let (stored, pair) = load_pair(path)?;
            if stored.construction != a.gen.construction {
                return Err(CliError::Usage(format!(
                    "--construction {:?} does not match the stored {:?} pair",
                    a.gen.construction, stored.construction
                )));
            }
            (stored, pair)
        }
        None => (a.gen.clone(), build_pair(&a.gen, config.seed)?),
    };
    let clauses = pair_clauses(&gen_args, &pair, a.eps_dist, config.seed)?;
    let passed = clauses.iter().all(|c| c.passed);
    let failed: Vec<String> = clauses.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    let result = VerifyResult {
        construction: gen_args.construction,
        clauses,
        passed,
    };
    let summary = if passed {
        format!("verify {:?}: all {} clauses pass", gen_args.construction, result.clauses.len())
    } else {
        format!("verify {:?}: FAILED {}", gen_args.construction, failed.join(", "))
    };
    Ok(Outcome {
        body: json(config, &result)?,
        summary,
        passed,
    })
}

// ---------------------------------------------------------------------------
// reconstruction

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconOutput {
    pub params: ReconParams,
    pub noise_level: f64,
    pub gamma: f64,
    pub lp_iterations: usize,
    pub lp_residual: f64,
    pub wasserstein_to_input: Option<f64>,
    pub input: DiracComb,
    pub comb: DiracComb,
}

fn load_comb(path: &Path, which: Side) -> Res<DiracComb> {
    let text = std::fs::read(path)?;
    let v: serde_json::Value = serde_json::from_slice(&text)?;
    if v.get("result").is_some() {
        let (_, pair) = load_pair(path)?;
        let (a, b) = pair_combs(&pair)?;
        return Ok(match which {
            Side::First => a.clone(),
            Side::Second => b.clone(),
        });
    }
    Ok(serde_json::from_value(v)?)
}

fn reconstruct(config: &ExperimentConfig, a: &ReconArgs) -> Res<Outcome> {
    let signal = match &a.input {
        Some(p) => load_comb(p, a.which)?,
        None => random_comb(a.d, a.spikes, config.seed, !a.positive)?,
    };
    let overrides = ParamOverrides {
        bandlimit: a.bandlimit,
        kappa: a.kappa,
        jackson_n: a.jackson_n,
        grid_k: a.grid_k,
        delta: a.delta,
    };
    let params = default_params(signal.dim(), a.epsilon, overrides)?;
    let table = table_of_capped(
        &signal,
        IndexSet::LinfBall {
            radius: params.bandlimit,
        },
        TABLE_CAP,
    )?;
    let noise_level = a.noise_level.unwrap_or(params.kappa);
    let mode = match a.noise {
        NoiseArg::WorstCaseSign => NoiseMode::WorstCaseSign,
        NoiseArg::UniformDisk => NoiseMode::UniformDisk,
        NoiseArg::None => NoiseMode::None,
    };
    let noisy = perturb(&table, noise_level, mode, config.seed)?;
    let rec = match a.mode {
        ReconMode::Signed => reconstruct_signed(&noisy, &params)?,
        ReconMode::Distribution => reconstruct_distribution(&noisy, &params)?,
    };
    let w = if signal.is_normalized() {
        Some(wasserstein(&signal, &rec.comb)?)
    } else {
        None
    };
    let summary = match w {
        Some(w) => format!("reconstruct: {} atoms, gamma = {:.6}, d_W to input = {w:.6}", rec.comb.len(), rec.gamma),
        None => format!("reconstruct: {} atoms, gamma = {:.6}", rec.comb.len(), rec.gamma),
    };
    let out = ReconOutput {
        params: rec.params,
        noise_level,
        gamma: rec.gamma,
        lp_iterations: rec.lp_iterations,
        lp_residual: rec.lp_residual,
        wasserstein_to_input: w,
        input: signal,
        comb: rec.comb,
    };
    Ok(Outcome {
        body: json(config, &out)?,
        summary,
        passed: true,
    })
}

// ---------------------------------------------------------------------------
// distances

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceOutput {
    pub metric: Metric,
    /// The distance itself, or the upper end of the heavy-hitter interval.
    pub value: f64,
    pub interval: Option<HHInterval>,
}

fn distance(config: &ExperimentConfig, a: &DistanceArgs) -> Res<Outcome> {
    let (x, y) = match (&a.input, &a.first, &a.second) {
        (Some(p), _, _) => {
            let (_, pair) = load_pair(p)?;
            let (x, y) = pair_combs(&pair)?;
            (x.clone(), y.clone())
        }
        (None, Some(f), Some(s)) => (load_comb(f, Side::First)?, load_comb(s, Side::First)?),
        _ => return Err(CliError::Usage("give --input or both --first and --second".into())),
    };
    let out = match a.metric {
        Metric::Wasserstein => DistanceOutput {
            metric: a.metric,
            value: wasserstein(&x, &y)?,
            interval: None,
        },
        Metric::Hh => {
            let p = HHParams {
                eps_dist: a.eps_dist,
                center_grid: a.center_grid,
                radius_grid: a.radius_grid,
            };
            let iv = hh_distance(&x, &y, &p)?;
            DistanceOutput {
                metric: a.metric,
                value: iv.upper,
                interval: Some(iv),
            }
        }
    };
    let summary = match &out.interval {
        Some(iv) => format!("hh distance in [{}, {}]", iv.lower, iv.upper),
        None => format!("wasserstein = {}", out.value),
    };
    Ok(Outcome {
        body: json(config, &out)?,
        summary,
        passed: true,
    })
}

// ---------------------------------------------------------------------------
// bump

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BumpReport {
    pub dim: usize,
    pub epsilon: f64,
    pub eps_dist: f64,
    pub regime: Regime,
    pub a: f64,
    pub b: f64,
    pub k: usize,
    pub base_degree: usize,
    /// Sup error of the ramp fit.
    pub achieved_error: f64,
    pub degree: usize,
    pub trig_degree: usize,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Failure of the interval checks on a fine grid, if any.
    pub grid_failure: Option<String>,
    pub checks: Vec<PropertyCheck>,
    pub passed: bool,
}

fn regime(r: RegimeArg) -> Regime {
    match r {
        RegimeArg::Near => Regime::Near,
        RegimeArg::Far => Regime::Far,
    }
}

fn bump_report(a: &BumpArgs, seed: u64) -> Res<BumpReport> {
    let b = build_q(a.epsilon, a.eps_dist, a.d, regime(a.regime))?;
    let (grid_failure, checks) = if a.verify {
        let g = verify_q(&b, 16_384)
            .err()
            .map(|f| format!("{} at x = {} (q = {})", f.property, f.x, f.value));
        (g, verify_bump(&b, a.samples, seed)?)
    } else {
        (None, Vec::new())
    };
    let passed = grid_failure.is_none() && checks.iter().all(|c| c.passed);
    Ok(BumpReport {
        dim: b.dim,
        epsilon: b.epsilon,
        eps_dist: b.eps_dist,
        regime: b.regime,
        a: b.a,
        b: b.b,
        k: b.k,
        base_degree: b.base_degree,
        achieved_error: b.base_error,
        degree: b.q.degree(),
        trig_degree: b.trig_degree(),
        inner_radius: b.inner_radius(),
        outer_radius: b.outer_radius(),
        grid_failure,
        checks,
        passed,
    })
}

fn bump(config: &ExperimentConfig, a: &BumpArgs) -> Res<Outcome> {
    let r = bump_report(a, config.seed)?;
    let summary = format!(
        "bump d={}: deg q = {}, k = {}, base degree {}{}",
        r.dim,
        r.degree,
        r.k,
        r.base_degree,
        if !a.verify {
            ""
        } else if r.passed {
            ", checks pass"
        } else {
            ", checks FAILED"
        }
    );
    Ok(Outcome {
        body: json(config, &r)?,
        summary,
        passed: r.passed,
    })
}

// ---------------------------------------------------------------------------
// sweeps

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRow {
    pub d: usize,
    pub epsilon: f64,
    pub side: usize,
    pub atoms: usize,
    pub max_fourier_diff: f64,
    pub min_cross_distance: f64,
    pub wasserstein: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OnedimRow {
    pub epsilon: f64,
    pub eps_dist: f64,
    pub odd_fourier_diff_error: f64,
    pub wasserstein_error: f64,
    pub hh_lower_error: f64,
    pub hh_upper_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BumpRow {
    pub d: usize,
    pub epsilon: f64,
    pub eps_dist: f64,
    pub k: usize,
    pub base_degree: usize,
    pub degree: usize,
    pub trig_degree: usize,
    pub achieved_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubeRow {
    pub d: usize,
    pub epsilon: f64,
    pub k: usize,
    pub a0: f64,
    pub ratio: f64,
    pub mass_gap: f64,
    pub slack: f64,
    pub bek_sup: f64,
    pub bek_bound: f64,
    pub pass: bool,
}

fn all_pass(c: &[Clause]) -> bool {
    c.iter().all(|c| c.passed)
}

fn grid_row(d: usize, eps: f64) -> Res<GridRow> {
    let (x, y, side) = grid_pair(d, eps)?;
    let c = grid_clauses(&x, &y, side, eps)?;
    Ok(GridRow {
        d,
        epsilon: eps,
        side,
        atoms: x.len(),
        max_fourier_diff: find(&c, "max_fourier_diff").unwrap_or(f64::NAN),
        min_cross_distance: find(&c, "min_cross_distance").unwrap_or(f64::NAN),
        wasserstein: find(&c, "wasserstein"),
        pass: all_pass(&c),
    })
}

fn onedim_row(eps: f64, eps_dist: f64) -> Res<OnedimRow> {
    let (x, y) = one_dim_pair(eps)?;
    let c = onedim_clauses(&x, &y, eps, eps_dist)?;
    let get = |n: &str| find(&c, n).unwrap_or(f64::NAN);
    Ok(OnedimRow {
        epsilon: eps,
        eps_dist,
        odd_fourier_diff_error: get("odd_fourier_diff_error"),
        wasserstein_error: get("wasserstein_error"),
        hh_lower_error: get("hh_lower_error"),
        hh_upper_error: get("hh_upper_error"),
        pass: all_pass(&c),
    })
}

fn bump_row(d: usize, eps: f64, a: &ReportArgs, seed: u64) -> Res<BumpRow> {
    let r = bump_report(
        &BumpArgs {
            d,
            epsilon: eps,
            eps_dist: a.eps_dist,
            regime: RegimeArg::Far,
            verify: true,
            samples: a.samples,
        },
        seed,
    )?;
    Ok(BumpRow {
        d,
        epsilon: eps,
        eps_dist: a.eps_dist,
        k: r.k,
        base_degree: r.base_degree,
        degree: r.degree,
        trig_degree: r.trig_degree,
        achieved_error: r.achieved_error,
        pass: r.passed,
    })
}

fn cube_row(d: usize, eps: f64, a: &ReportArgs, seed: u64) -> Res<CubeRow> {
    let p = cube_mixture_pair(d, eps)?;
    let c = cube_clauses(&p, None, a.eps_dist, seed)?;
    let bek = bek_supnorm_check(&p.poly, bek_interval_lo(d, p.poly.k))?;
    Ok(CubeRow {
        d,
        epsilon: eps,
        k: p.poly.k,
        a0: p.poly.coefficients[0],
        ratio: p.poly.ratio,
        mass_gap: p.mass_gap(),
        slack: p.slack(),
        bek_sup: bek.sup,
        bek_bound: bek.bound,
        pass: all_pass(&c),
    })
}

/// Evaluate `f` on every grid point concurrently, keeping input order.
fn sweep<R: Send>(points: &[(usize, f64)], f: impl Fn(usize, f64) -> Res<R> + Sync) -> Res<Vec<R>> {
    let f = &f;
    let results: Vec<Res<R>> = std::thread::scope(|s| {
        let handles: Vec<_> = points.iter().map(|&(d, e)| s.spawn(move || f(d, e))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(CliError::Failed("sweep worker panicked".into()))))
            .collect()
    });
    results.into_iter().collect()
}

fn render<R: Serialize>(config: &ExperimentConfig, rows: &[R]) -> Res<Vec<u8>> {
    match config.format {
        Format::Json => json(config, &rows),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)?;
            }
            w.into_inner().map_err(|e| CliError::Failed(e.to_string()))
        }
    }
}

fn report(config: &ExperimentConfig, a: &ReportArgs) -> Res<Outcome> {
    let mut points = Vec::new();
    let dims: &[usize] = if a.kind == ReportKind::Onedim { &[1] } else { &a.d_values };
    for &d in dims {
        for &e in &a.eps_values {
            points.push((d, e));
        }
    }
    let seed = config.seed;
    let (body, total, passed) = match a.kind {
        ReportKind::Grid => {
            let rows = sweep(&points, grid_row)?;
            (render(config, &rows)?, rows.len(), rows.iter().filter(|r| r.pass).count())
        }
        ReportKind::Onedim => {
            let rows = sweep(&points, |_, e| onedim_row(e, a.eps_dist))?;
            (render(config, &rows)?, rows.len(), rows.iter().filter(|r| r.pass).count())
        }
        ReportKind::Bump => {
            let rows = sweep(&points, |d, e| bump_row(d, e, a, seed))?;
            (render(config, &rows)?, rows.len(), rows.iter().filter(|r| r.pass).count())
        }
        ReportKind::Cube => {
            let rows = sweep(&points, |d, e| cube_row(d, e, a, seed))?;
            (render(config, &rows)?, rows.len(), rows.iter().filter(|r| r.pass).count())
        }
    };
    Ok(Outcome {
        body,
        summary: format!("report {:?}: {passed}/{total} rows pass", a.kind),
        passed: passed == total,
    })
}
