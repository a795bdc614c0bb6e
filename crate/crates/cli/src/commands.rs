//! One function per subcommand; each returns the resolved configuration and the result.

use std::path::{Path, PathBuf};

use linvol::cocycle::{expansion_probe, find_positive_cycle, lyapunov_spectrum, LyapunovOptions};
use linvol::rauzy::{rauzy_path, zorich_path, RauzyClass, DEFAULT_RUN_CAP};
use linvol::sampler::LengthSampler;
use linvol::scalar::rational_to_f64;
use linvol::suspension::{singularity_pattern, stratum_of, Flavor, Stratum, SuspensionData};
use linvol::weakmix::{
    cesaro_correlation, obstruction_series_for, parse_rational, weak_mixing_report, ObstructionVector, Observable,
    Thresholds, WeakMixError, WeakMixOptions,
};
use linvol::{GeneralizedPermutation, LengthVector, LinearInvolution, Rational};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    config_hash, parse_permutation, text_or_file, Backend, ClassesParams, CorrelateParams, CycleParams,
    ExperimentConfig, InductParams, LengthSource, VeechParams, DEFAULT_LENGTH_BITS,
};
use crate::{CliError, Cli, Command, Precision, Report, VERSIONS};

pub type JsonReport = Report<Value, Value>;

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::compute("serialize", e))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Output { path: path.display().to_string(), message: e.to_string() })
}

fn rational_strings(v: &[BigRational]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

/// Inputs shared by all subcommands, after merging flags over the config file.
struct Context<'a> {
    cli: &'a Cli,
    config: &'a ExperimentConfig,
    seed: u64,
}

impl Context<'_> {
    fn permutation(&self) -> Result<GeneralizedPermutation, CliError> {
        match (&self.cli.perm, &self.config.permutation) {
            (Some(text), _) => parse_permutation(text),
            (None, Some(src)) => src.resolve(),
            (None, None) => Err(CliError::Config("no permutation given; use --perm or the config key \"permutation\"".into())),
        }
    }

    fn given_lengths(&self, perm: &GeneralizedPermutation) -> Result<Option<Vec<BigRational>>, CliError> {
        let source = match (&self.cli.lambda, &self.config.lengths) {
            (Some(text), _) => {
                let text = text_or_file(text)?;
                if text.trim_start().starts_with('{') {
                    let map = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("lengths: {e}")))?;
                    LengthSource::Map(map)
                } else {
                    LengthSource::Text(text)
                }
            }
            (None, Some(src)) => src.clone(),
            (None, None) => return Ok(None),
        };
        lengths_from_source(perm, &source).map(Some)
    }

    /// Given lengths, or admissible lengths drawn from the seed.
    fn exact_lengths(&self, perm: &GeneralizedPermutation, bits: u64) -> Result<(Vec<BigRational>, bool), CliError> {
        if let Some(v) = self.given_lengths(perm)? {
            return Ok((v, false));
        }
        let sampler = LengthSampler::new(perm).map_err(|e| CliError::compute("sample", e))?;
        let v = sampler.exact_from_seed(self.seed, 0, bits).map_err(|e| CliError::compute("sample", e))?;
        Ok((v, true))
    }

    fn output(&self, flag: &Option<PathBuf>, pick: impl Fn(&crate::config::Outputs) -> Option<PathBuf>) -> Option<PathBuf> {
        flag.clone().or_else(|| self.config.outputs.as_ref().and_then(pick))
    }
}

fn lengths_from_source(perm: &GeneralizedPermutation, source: &LengthSource) -> Result<Vec<BigRational>, CliError> {
    let bad = |msg: String| CliError::Config(format!("lengths: {msg}"));
    let values = match source {
        LengthSource::File { file } => {
            let text = std::fs::read_to_string(file).map_err(|e| bad(format!("cannot read {}: {e}", file.display())))?;
            let inner = if text.trim_start().starts_with('{') {
                LengthSource::Map(serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?)
            } else {
                LengthSource::Text(text)
            };
            return lengths_from_source(perm, &inner);
        }
        LengthSource::Text(text) => text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| parse_rational(t).ok_or_else(|| bad(format!("cannot parse {t:?}"))))
            .collect::<Result<Vec<_>, _>>()?,
        LengthSource::Map(map) => {
            let mut out = Vec::with_capacity(perm.d());
            for label in perm.alphabet() {
                let v = map.get(label).ok_or_else(|| bad(format!("missing letter {label}")))?;
                let text = match v {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => n.to_string(),
                    other => return Err(bad(format!("{label}: {other} is not a number"))),
                };
                out.push(parse_rational(&text).ok_or_else(|| bad(format!("cannot parse {text:?}")))?);
            }
            if map.len() != perm.d() {
                return Err(bad("unknown letters in the length map".into()));
            }
            out
        }
    };
    let lv = LengthVector::<Rational>::new(perm, values).map_err(|e| bad(e.to_string()))?;
    Ok(lv.into_values())
}

pub fn dispatch(cli: &Cli, config: &ExperimentConfig) -> Result<JsonReport, CliError> {
    let ctx = Context { cli, config, seed: cli.seed.or(config.seed).unwrap_or(0) };
    let perm = ctx.permutation()?;
    let (params, result) = match &cli.command {
        Command::Validate => validate(&ctx, &perm)?,
        Command::Classes { cap, dot } => classes(&ctx, &perm, *cap, dot)?,
        Command::Induct { steps, zorich, bits } => induct(&ctx, &perm, *steps, *zorich, *bits)?,
        Command::Suspend { svg, csv } => suspend(&ctx, &perm, svg, csv)?,
        Command::Stratum => stratum(&perm)?,
        Command::Cover { orders } => cover(&ctx, &perm, orders.as_deref())?,
        Command::Lyapunov { steps, batches, k, warmup, orthonormalize_every, precision, csv } => {
            let mut opts = config.lyapunov.clone().unwrap_or_default();
            opts.seed = ctx.seed;
            opts.steps = steps.unwrap_or(opts.steps);
            opts.batches = batches.unwrap_or(opts.batches);
            opts.k = k.or(opts.k);
            opts.warmup = warmup.unwrap_or(opts.warmup);
            opts.orthonormalize_every = orthonormalize_every.unwrap_or(opts.orthonormalize_every);
            lyapunov(&ctx, &perm, opts, precision.unwrap_or(Precision::F64), csv)?
        }
        Command::Cycle { attempts, max_len, pairs } => {
            let mut p = config.cycle.clone().unwrap_or_default();
            p.attempts = attempts.unwrap_or(p.attempts);
            p.max_len = max_len.unwrap_or(p.max_len);
            p.pairs = pairs.unwrap_or(p.pairs);
            cycle(&ctx, &perm, p)?
        }
        Command::Veech { t, v, steps, backend, bits, radius, csv } => {
            let mut p = config.veech.clone().unwrap_or_default();
            if let Some(t) = t {
                p.t = t.clone();
                p.v = None;
            }
            if let Some(v) = v {
                p.v = Some(v.split(',').map(|s| s.trim().to_string()).collect());
            }
            p.steps = steps.unwrap_or(p.steps);
            p.window.radius = radius.unwrap_or(p.window.radius);
            let backend = match backend {
                Some(kind) => Backend::parse(kind, *bits)?,
                None => match (config.backend, bits) {
                    (Some(Backend::Float { .. }), Some(b)) => Backend::Float { bits: *b },
                    (Some(b), _) => b,
                    (None, Some(b)) => Backend::Float { bits: *b },
                    (None, None) => Backend::Rational,
                },
            };
            veech(&ctx, &perm, p, backend, csv)?
        }
        Command::Correlate { f, g, max_lag, orbit_len, csv } => {
            let mut p = config.correlate.clone().unwrap_or_default();
            if let Some(f) = f {
                p.f = parse_observable(f)?;
            }
            if let Some(g) = g {
                p.g = parse_observable(g)?;
            }
            p.options.seed = ctx.seed;
            p.options.max_lag = max_lag.unwrap_or(p.options.max_lag);
            p.options.orbit_len = orbit_len.unwrap_or(p.options.orbit_len);
            correlate(&ctx, &perm, p, csv)?
        }
        Command::Scan { samples, tgrid, steps, radius, csv } => {
            let mut opts = config.scan.clone().unwrap_or_default();
            opts.seed = ctx.seed;
            opts.samples = samples.unwrap_or(opts.samples);
            if let Some(g) = tgrid {
                opts.tgrid = g.clone();
            }
            opts.steps = steps.unwrap_or(opts.steps);
            opts.window.radius = radius.unwrap_or(opts.window.radius);
            scan(&ctx, &perm, opts, csv)?
        }
    };
    let resolved = json!({
        "permutation": perm,
        "seed": ctx.seed,
        cli.command.name(): params,
    });
    Ok(Report { command: cli.command.name(), versions: VERSIONS, config_hash: config_hash(&resolved), config: resolved, result })
}

type Outcome = Result<(Value, Value), CliError>;

fn validate(ctx: &Context, perm: &GeneralizedPermutation) -> Outcome {
    let mut result = json!({
        "d": perm.d(),
        "l": perm.l(),
        "m": perm.m(),
        "classes": perm.classes(),
        "genuine": perm.is_genuine(),
        "iet_like": perm.is_iet_like(),
        "admits_lengths": perm.admits_lengths(),
        "warnings": perm.warnings(),
        "irreducible": perm.is_irreducible(),
        "witness": perm.reducibility_witness().map(|w| json!({
            "corners": w,
            "sets": w.labelled_sets(perm),
            "shape": w.reducible_shape(),
        })),
        "dynamically_irreducible": perm.is_dynamically_irreducible(),
    });
    let mut params = json!({});
    if let Some(lam) = ctx.given_lengths(perm)? {
        params = json!({ "lengths": rational_strings(&lam) });
        result["lengths_admissible"] = json!(perm.admissibility(&lam).is_ok());
        if let Err(obstruction) = perm.admissibility(&lam) {
            result["obstruction"] = to_value(&obstruction)?;
        }
    }
    Ok((params, result))
}

fn classes(ctx: &Context, perm: &GeneralizedPermutation, cap: Option<usize>, dot: &Option<PathBuf>) -> Outcome {
    let mut p = ctx.config.classes.clone().unwrap_or_else(ClassesParams::default);
    p.cap = cap.unwrap_or(p.cap);
    let class = RauzyClass::enumerate(perm, p.cap).map_err(|e| CliError::compute("rauzy", e))?;
    if let Some(path) = ctx.output(dot, |o| o.dot.clone()) {
        write_file(&path, &class.to_dot())?;
    }
    let nodes: Vec<String> = class.nodes.iter().map(|q| q.to_string()).collect();
    let result = json!({
        "size": class.len(),
        "edges": class.edge_count(),
        "nodes": nodes,
        "transitions": class.edges,
    });
    Ok((to_value(&p)?, result))
}

fn induct(ctx: &Context, perm: &GeneralizedPermutation, steps: Option<usize>, zorich: bool, bits: Option<u64>) -> Outcome {
    let mut p = ctx.config.induct.clone().unwrap_or_else(InductParams::default);
    p.steps = steps.unwrap_or(p.steps);
    p.zorich |= zorich;
    p.bits = bits.unwrap_or(p.bits);
    let (lam, sampled) = ctx.exact_lengths(perm, p.bits)?;
    let t = LinearInvolution::from_aligned(perm.clone(), lam.clone()).map_err(|e| CliError::compute("involution", e))?;
    let rauzy = |e| CliError::compute("rauzy", e);
    let (path, end, runs) = if p.zorich {
        let (z, end) = zorich_path(&t, p.steps, DEFAULT_RUN_CAP).map_err(rauzy)?;
        (z.path, end, Some(z.runs))
    } else {
        let (path, end) = rauzy_path(&t, p.steps).map_err(rauzy)?;
        (path, end, None)
    };
    let after = end.lengths().to_vec();
    let reconstructed = path.product.apply(&after);
    let mut result = json!({
        "lengths": rational_strings(&lam),
        "sampled_lengths": sampled,
        "elementary_steps": path.len(),
        "moves": path.moves(),
        "start": path.start.to_string(),
        "end": path.end.to_string(),
        "product": path.product,
        "visiting_matrix": path.visiting_matrix(),
        "lengths_after": rational_strings(&after),
        "product_maps_back": reconstructed == lam,
    });
    if let Some(runs) = runs {
        result["runs"] = to_value(&runs)?;
    }
    let params = json!({ "steps": p.steps, "zorich": p.zorich, "bits": p.bits, "lengths": rational_strings(&lam) });
    Ok((params, result))
}

fn suspend(ctx: &Context, perm: &GeneralizedPermutation, svg: &Option<PathBuf>, csv: &Option<PathBuf>) -> Outcome {
    let (lam, sampled) = ctx.exact_lengths(perm, DEFAULT_LENGTH_BITS)?;
    let lv = LengthVector::new(perm, lam.clone()).map_err(|e| CliError::compute("involution", e))?;
    let data = SuspensionData::<Rational>::find(perm, &lv).map_err(|e| CliError::compute("suspension", e))?;
    let polygon = data.polygon();
    if let Some(path) = ctx.output(svg, |o| o.svg.clone()) {
        write_file(&path, &polygon.to_svg(perm))?;
    }
    if let Some(path) = ctx.output(csv, |o| o.csv.clone()) {
        write_file(&path, &polygon.to_csv())?;
    }
    let result = json!({
        "lengths": rational_strings(&lam),
        "sampled_lengths": sampled,
        "tau": rational_strings(data.tau()),
        "heights": rational_strings(&data.heights()),
        "area": data.area().to_string(),
        "polygon": polygon,
    });
    Ok((json!({ "lengths": rational_strings(&lam) }), result))
}

fn stratum(perm: &GeneralizedPermutation) -> Outcome {
    let s = stratum_of(perm).map_err(|e| CliError::compute("suspension", e))?;
    let pattern = singularity_pattern(perm);
    let result = json!({
        "stratum": s,
        "pattern": pattern,
        "odd_count": s.odd_count(),
        "cocycle_rank": s.cocycle_rank(),
    });
    Ok((json!({}), result))
}

fn cover(ctx: &Context, perm: &GeneralizedPermutation, orders: Option<&str>) -> Outcome {
    let config_orders = ctx.config.cover.as_ref().and_then(|c| c.orders.clone());
    let orders = match orders {
        Some(text) => Some(
            text.split(',')
                .map(|s| s.trim().parse::<i64>().map_err(|_| CliError::Config(format!("orders: cannot parse {s:?}"))))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => config_orders,
    };
    let base = match &orders {
        Some(o) => Stratum::quadratic(o.clone()).map_err(|e| CliError::Config(format!("orders: {e}")))?,
        None => stratum_of(perm).map_err(|e| CliError::compute("suspension", e))?,
    };
    if base.flavor != Flavor::Quadratic {
        return Err(CliError::compute("suspension", "the orientation cover is defined for quadratic strata only"));
    }
    let cover = base.double_cover().map_err(|e| CliError::compute("suspension", e))?;
    let result = json!({
        "stratum": base,
        "cover": cover,
        "cover_zero_sum": cover.orders.iter().sum::<i64>(),
        "cover_euler": 2 * cover.genus - 2,
    });
    Ok((json!({ "orders": orders }), result))
}

fn lyapunov(
    ctx: &Context,
    perm: &GeneralizedPermutation,
    opts: LyapunovOptions,
    precision: Precision,
    csv: &Option<PathBuf>,
) -> Outcome {
    let report = match precision {
        Precision::F64 => lyapunov_spectrum::<f64>(perm, &opts),
        Precision::F32 => lyapunov_spectrum::<f32>(perm, &opts),
    }
    .map_err(|e| CliError::compute("cocycle", e))?;
    if let Some(path) = ctx.output(csv, |o| o.csv.clone()) {
        let k = report.exponents.len();
        let mut text = String::from("batch");
        for i in 1..=k {
            text.push_str(&format!(",theta_{i}"));
        }
        text.push('\n');
        for (b, row) in report.batch_exponents.iter().enumerate() {
            text.push_str(&b.to_string());
            for x in row {
                text.push_str(&format!(",{x:e}"));
            }
            text.push('\n');
        }
        write_file(&path, &text)?;
    }
    let stratum = stratum_of(perm).ok();
    let mut result = to_value(&report)?;
    if let Some(s) = stratum {
        result["expected_near_zero"] = json!(perm.d().saturating_sub(s.cocycle_rank()));
        result["stratum"] = to_value(&s)?;
    }
    let precision = match precision {
        Precision::F32 => "f32",
        Precision::F64 => "f64",
    };
    let mut params = to_value(&opts)?;
    params["precision"] = json!(precision);
    Ok((params, result))
}

fn cycle(ctx: &Context, perm: &GeneralizedPermutation, p: CycleParams) -> Outcome {
    let dom = find_positive_cycle(perm, ctx.seed, p.attempts, p.max_len).map_err(|e| CliError::compute("cocycle", e))?;
    let probe = expansion_probe(&dom.cycle.product, p.pairs, ctx.seed);
    let result = json!({
        "length": dom.cycle.len(),
        "moves": dom.cycle.moves(),
        "product": dom.cycle.product,
        "positive": dom.cycle.product.is_positive(),
        "diameter": dom.diameter,
        "contraction": dom.contraction,
        "expansion": probe,
    });
    Ok((to_value(&p)?, result))
}

fn veech(ctx: &Context, perm: &GeneralizedPermutation, p: VeechParams, backend: Backend, csv: &Option<PathBuf>) -> Outcome {
    let d = perm.d();
    let coords: Vec<BigRational> = match &p.v {
        Some(v) => v
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| CliError::Config(format!("v: cannot parse {s:?}"))))
            .collect::<Result<_, _>>()?,
        None => {
            let t = parse_rational(&p.t).ok_or_else(|| CliError::Config(format!("t: cannot parse {:?}", p.t)))?;
            vec![t; d]
        }
    };
    if coords.len() != d {
        return Err(CliError::Config(format!("v has {} coordinates, expected {d}", coords.len())));
    }
    let bits = p.bits.unwrap_or(256 + 2 * p.steps as u64);
    let (lam, sampled) = ctx.exact_lengths(perm, bits)?;
    let exact = ObstructionVector::Exact(coords.clone());
    let vector = match backend {
        Backend::Rational => exact.clone(),
        Backend::Float { bits } => ObstructionVector::Float { values: coords.iter().map(rational_to_f64).collect(), bits },
    };
    let weak = |e: WeakMixError| CliError::compute("weakmix", e);
    let (series, fallback) = match obstruction_series_for(perm, &lam, &vector, p.steps, &p.window) {
        Ok(s) => (s, None),
        Err(WeakMixError::PrecisionExhausted { step, bits }) => {
            let s = obstruction_series_for(perm, &lam, &exact, p.steps, &p.window).map_err(weak)?;
            (s, Some(json!({ "step": step, "bits": bits })))
        }
        Err(e) => return Err(weak(e)),
    };
    if let Some(path) = ctx.output(csv, |o| o.csv.clone()) {
        write_file(&path, &series.to_csv())?;
    }
    let lattice = coords.iter().all(|x| x.is_integer());
    let thresholds = ctx.config.scan.as_ref().map(|s| s.thresholds.clone()).unwrap_or_else(Thresholds::default);
    let verdict = thresholds.verdict(&series, lattice);
    let result = json!({
        "lengths": rational_strings(&lam),
        "sampled_lengths": sampled,
        "v": rational_strings(&coords),
        "backend": backend,
        "fallback": fallback.is_some(),
        "precision_lost": fallback,
        "verdict": verdict,
        "series": series,
    });
    let mut params = to_value(&p)?;
    params["bits"] = json!(bits);
    params["backend"] = to_value(&backend)?;
    params["lengths"] = json!(rational_strings(&lam));
    Ok((params, result))
}

/// `constant`, `component:C`, `C:lo-hi[,C:lo-hi...]` with fractions of the length, or JSON.
pub fn parse_observable(text: &str) -> Result<Observable, CliError> {
    let bad = |m: String| CliError::Config(format!("observable: {m}"));
    let t = text.trim();
    if t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| bad(e.to_string()));
    }
    if t == "constant" {
        return Ok(Observable::constant());
    }
    if let Some(c) = t.strip_prefix("component:") {
        let c: usize = c.parse().map_err(|_| bad(format!("component {c:?}")))?;
        return Ok(Observable::component(c));
    }
    let mut obs = Observable { intervals: Vec::new() };
    for part in t.split(',') {
        let (c, range) = part.split_once(':').ok_or_else(|| bad(format!("expected C:lo-hi, got {part:?}")))?;
        let (lo, hi) = range.split_once('-').ok_or_else(|| bad(format!("expected lo-hi, got {range:?}")))?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("cannot parse {s:?}")));
        let c: usize = c.trim().parse().map_err(|_| bad(format!("component {c:?}")))?;
        obs = obs.union(Observable::interval(c, num(lo)?, num(hi)?));
    }
    obs.validate().map_err(|e| bad(e.to_string()))?;
    Ok(obs)
}

fn correlate(ctx: &Context, perm: &GeneralizedPermutation, p: CorrelateParams, csv: &Option<PathBuf>) -> Outcome {
    let (lam, sampled) = ctx.exact_lengths(perm, DEFAULT_LENGTH_BITS)?;
    let floats: Vec<f64> = lam.iter().map(rational_to_f64).collect();
    let t = LinearInvolution::from_aligned(perm.clone(), floats).map_err(|e| CliError::compute("involution", e))?;
    let report = cesaro_correlation(&t, &p.f, &p.g, &p.options).map_err(|e| match e {
        WeakMixError::InvalidObservable(m) => CliError::Config(format!("observable: {m}")),
        other => CliError::compute("weakmix", other),
    })?;
    if let Some(path) = ctx.output(csv, |o| o.csv.clone()) {
        let mut text = String::from("n,cesaro,error\n");
        for ((n, v), e) in report.n.iter().zip(&report.values).zip(&report.error) {
            text.push_str(&format!("{n},{v:e},{e:e}\n"));
        }
        write_file(&path, &text)?;
    }
    let mut result = to_value(&report)?;
    result["lengths"] = json!(rational_strings(&lam));
    result["sampled_lengths"] = json!(sampled);
    let mut params = to_value(&p)?;
    params["lengths"] = json!(rational_strings(&lam));
    Ok((params, result))
}

fn scan(ctx: &Context, perm: &GeneralizedPermutation, opts: WeakMixOptions, csv: &Option<PathBuf>) -> Outcome {
    let report = weak_mixing_report(perm, &opts).map_err(|e| match e {
        WeakMixError::InvalidGrid(m) => CliError::Config(format!("tgrid: {m}")),
        other => CliError::compute("weakmix", other),
    })?;
    if let Some(path) = ctx.output(csv, |o| o.csv.clone()) {
        let mut text = String::from("sample,t,verdict,returns,tail_min,tail_max\n");
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:e}"));
        for s in &report.samples {
            for c in &s.candidates {
                let verdict = serde_json::to_value(c.verdict).ok().and_then(|v| v.as_str().map(str::to_string));
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    s.index,
                    c.t,
                    verdict.unwrap_or_default(),
                    c.returns,
                    opt(c.tail_min),
                    opt(c.tail_max)
                ));
            }
        }
        write_file(&path, &text)?;
    }
    Ok((to_value(&opts)?, to_value(&report)?))
}
