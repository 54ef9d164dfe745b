use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::Result;
use rayon::prelude::*;

use ltwist::bsd::{self, BsdInvariants, HeightResult, RationalPoint};
use ltwist::curve::{an_table, prime_traces, CoefficientTable, CurveConfig, Provider, DEFAULT_POINT_COUNT_CAP};
use ltwist::lfunc::{self, LValue};
use ltwist::models::{self, GranvilleBox, HeegnerParams, Quadrants, Scheme};
use ltwist::stats::{self, RatioRow};
use ltwist::twist::{
    self, check_eligible, enumerate_fundamental, twisted_coefficients, Parity, PrecisionPolicy, ScanOptions, Signs, ThresholdPolicy,
    TwistRecord, TwistSpec, Vanishing,
};
use ltwist::Error;

use crate::output::{num, sha256_hex, Report};
use crate::*;

/// Largest coefficient table any single command will build.
const MAX_TABLE_TERMS: usize = 400_000_000;

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Scan(a) => scan(a),
        Command::Lvalue(a) => lvalue(a),
        Command::Coeffs(a) => coeffs(a),
        Command::Distribution(a) => distribution(a),
        Command::FitExponent(a) => fit_exponent(a),
        Command::TailSlope(a) => tail_slope(a),
        Command::Residuosity(a) => residuosity(a),
        Command::FitK(a) => fit_k(a),
        Command::Model(ModelCommand::Heegner(a)) => heegner(a),
        Command::Model(ModelCommand::Granville(a)) => granville(a),
        Command::Predict(a) => predict(a),
        Command::Bsd(a) => bsd_one(a),
        Command::BsdScan(a) => bsd_scan(a),
    }
}

fn provider(p: ProviderArg) -> Provider {
    match p {
        ProviderArg::Hybrid => Provider::Hybrid,
        ProviderArg::Eta => Provider::Eta,
        ProviderArg::PointCount => Provider::PointCount,
    }
}

fn parity(p: ParityArg) -> Option<Parity> {
    match p {
        ParityArg::Odd => Some(Parity::Odd),
        ParityArg::Even => Some(Parity::Even),
        ParityArg::Both => None,
    }
}

fn load_curve(path: &Path) -> Result<(CurveConfig, String)> {
    let cfg = CurveConfig::from_file(path)?;
    cfg.validate()?;
    let digest = sha256_hex(cfg.to_config_string().as_bytes());
    Ok((cfg, digest))
}

fn read_input(path: &Path) -> Result<(Vec<u8>, String)> {
    let bytes = fs::read(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let digest = sha256_hex(&bytes);
    Ok((bytes, digest))
}

fn read_scan(path: &Path) -> Result<(Vec<TwistRecord>, String)> {
    let (bytes, digest) = read_input(path)?;
    let records = twist::read_csv(BufReader::new(bytes.as_slice()))?;
    Ok((records, digest))
}

fn table(cfg: &CurveConfig, m: usize, p: ProviderArg) -> Result<CoefficientTable> {
    if m > MAX_TABLE_TERMS {
        return Err(Error::Budget(format!("{m} coefficients needed, at most {MAX_TABLE_TERMS} are built")).into());
    }
    Ok(an_table(cfg, m.max(1), provider(p))?)
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn scan(a: ScanArgs) -> Result<()> {
    let (cfg, digest) = load_curve(&a.curve)?;
    let opts = ScanOptions {
        parity: parity(a.parity),
        signs: match a.signs {
            SignsArg::Both => Signs::Both,
            SignsArg::Positive => Signs::Positive,
            SignsArg::Negative => Signs::Negative,
        },
        precision: PrecisionPolicy { coarse_eps: a.coarse_eps, refine_eps: a.refine_eps, max_terms: a.max_terms },
        threshold: ThresholdPolicy { tau: a.tau },
        provider: provider(a.provider),
    };
    let needed = twist::base_terms_needed(&cfg, a.xmax, &opts);
    if needed > MAX_TABLE_TERMS {
        return Err(Error::Budget(format!("{needed} coefficients needed; pass --max-terms")).into());
    }
    let report = twist::scan(&cfg, a.xmax, &opts)?;
    let mut out = Report::new(digest, None);
    out.note(format!("curve: {}", cfg.label));
    out.note(format!("xmax: {}", a.xmax));
    out.note(format!("provider: {}", opts.provider.name()));
    out.note(format!("tau: {}", num(a.tau)));
    out.note(format!("base_terms: {}", report.base_terms));
    out.note(format!("records: {}", report.records.len()));
    let count = |v: Vanishing| report.records.iter().filter(|r| r.vanishing == v).count();
    out.note(format!("vanishing: {}", count(Vanishing::Yes)));
    out.note(format!("unresolved: {}", count(Vanishing::Unresolved)));
    out.note(format!("skipped: {}", report.skipped.len()));
    out.note(format!("negative_even_values: {}", report.negative.len()));
    let mut body = Vec::new();
    twist::write_csv(&mut body, &[], &report.records)?;
    out.rows(&String::from_utf8(body)?);
    let mut extra = Vec::new();
    if let Some(path) = &a.out.out {
        let mut skip = Vec::new();
        twist::write_skip_manifest(&mut skip, &[format!("skip list for {}", path.display())], &report)?;
        let mut p = path.as_os_str().to_owned();
        p.push(".skipped.csv");
        extra.push((PathBuf::from(p), String::from_utf8(skip)?));
    }
    out.finish(a.out.out.as_deref(), &extra)
}

/// Evaluates `L^(r)(E_d,1)/r!` for an eligible twist (or the curve itself
/// when `d = 1`) from a table sized for it.
fn twist_value(cfg: &CurveConfig, tab: &CoefficientTable, d: i64, r: u32, eps: f64) -> Result<LValue> {
    let spec = TwistSpec::new(cfg, d)?;
    let n = spec.conductor as f64;
    let m = lfunc::terms_needed(n, r, 0.5 * eps);
    let view = twisted_coefficients(tab, cfg, d, m)?;
    Ok(lfunc::l_derivative(&view, n, r, eps)?)
}

fn lvalue(a: LvalueArgs) -> Result<()> {
    let (cfg, digest) = load_curve(&a.curve)?;
    let spec = TwistSpec::new(&cfg, a.twist)?;
    let r = a.order.unwrap_or(spec.parity.order());
    if !(a.eps > 0.0) {
        return Err(usage("--eps must be positive"));
    }
    let m = lfunc::terms_needed(spec.conductor as f64, r, 0.5 * a.eps);
    let tab = table(&cfg, m, a.provider)?;
    let v = twist_value(&cfg, &tab, a.twist, r, a.eps)?;
    let mut out = Report::new(digest, None);
    out.note(format!("curve: {}", cfg.label));
    out.note(format!("provider: {}", tab.provider.name()));
    out.row("d,order,value,error,terms,conductor");
    out.row(format!("{},{},{},{},{},{}", a.twist, r, num(v.value), num(v.error), v.terms, spec.conductor));
    out.finish(a.out.out.as_deref(), &[])
}

fn coeffs(a: CoeffsArgs) -> Result<()> {
    let (cfg, digest) = load_curve(&a.curve)?;
    if a.count == 0 {
        return Err(usage("--count must be positive"));
    }
    let tab = table(&cfg, a.count, a.provider)?;
    let mut out = Report::new(digest, None);
    out.note(format!("curve: {}", cfg.label));
    out.note(format!("provider: {}", tab.provider.name()));
    out.row("n,a_n");
    for n in 1..=a.count {
        out.row(format!("{n},{}", tab.get(n)));
    }
    out.finish(a.out.out.as_deref(), &[])
}

fn distribution(a: DistributionArgs) -> Result<()> {
    let (records, digest) = read_scan(&a.input)?;
    let dist = stats::cumulative_distribution(&records, a.normalise)?;
    let mut out = Report::new(digest, None);
    out.note(format!("normalised: {}", a.normalise));
    out.note(format!("zeros: {}", dist.zeros));
    out.note(format!("unresolved: {}", dist.unresolved));
    out.note(format!("points: {}", dist.points.len()));
    out.row("x,F");
    for (x, f) in &dist.points {
        out.row(format!("{},{}", num(*x), num(*f)));
    }
    out.finish(a.out.out.as_deref(), &[])
}

fn fit_exponent(a: FitExponentArgs) -> Result<()> {
    let (records, digest) = read_scan(&a.input)?;
    let xs = if a.xs.is_empty() {
        let top = records.iter().map(|r| r.d.unsigned_abs()).max().unwrap_or(0) + 1;
        (0..a.points).rev().map(|i| ((top as f64) * 0.5f64.powf(i as f64 / 2.0)).round() as u64).collect()
    } else {
        a.xs.clone()
    };
    let counts = stats::vanishing_counts(&records, &xs);
    let fit = stats::fit_power_exponent(&counts)?;
    let mut out = Report::new(digest, None);
    for (x, c) in &counts {
        out.note(format!("count below {x}: {c}"));
    }
    out.row("fit,estimate,std_error,samples");
    for (name, f) in [("overall", &fit.overall), ("upper", &fit.upper)] {
        out.row(format!("{name},{},{},{}", num(f.estimate), num(f.std_error), f.samples));
    }
    out.finish(a.out.out.as_deref(), &[])
}

fn tail_slope(a: TailSlopeArgs) -> Result<()> {
    let (records, digest) = read_scan(&a.input)?;
    let values = stats::nonzero_values(&records, a.normalise);
    let fit = stats::tail_slope(&values, a.window)?;
    let mut out = Report::new(digest, None);
    out.note(format!("normalised: {}", a.normalise));
    out.note(format!("window: {}", fit.window));
    out.row("estimate,std_error,samples");
    out.row(format!("{},{},{}", num(fit.estimate), num(fit.std_error), fit.samples));
    out.finish(a.out.out.as_deref(), &[])
}

pub const RESIDUOSITY_HEADER: &str = "p,ap,residues,nonresidues,observed,predicted";

fn residuosity(a: ResiduosityArgs) -> Result<()> {
    let (records, digest) = read_scan(&a.input)?;
    let (cfg, _) = load_curve(&a.curve)?;
    let vanishing: Vec<i64> = records.iter().filter(|r| r.vanishing == Vanishing::Yes).map(|r| r.d).collect();
    let traces = prime_traces(&cfg, &a.primes, DEFAULT_POINT_COUNT_CAP)?;
    let lookup = |p: u64| -> ltwist::Result<i64> {
        a.primes.iter().position(|&q| q == p).map(|i| traces[i]).ok_or(Error::MissingPrime { p })
    };
    let rows = stats::residuosity_table(&vanishing, &a.primes, lookup, a.k)?;
    let mut out = Report::new(digest, None);
    out.note(format!("curve: {}", cfg.label));
    out.note(format!("vanishing: {}", vanishing.len()));
    out.note(format!("k: {}", num(a.k)));
    out.row(RESIDUOSITY_HEADER);
    for r in &rows {
        let observed = r.observed.map(num).unwrap_or_else(|| "nan".into());
        out.row(format!("{},{},{},{},{},{}", r.p, r.ap, r.residues, r.nonresidues, observed, num(r.predicted)));
    }
    out.finish(a.out.out.as_deref(), &[])
}

fn parse_ratio_rows(text: &str) -> Result<Vec<RatioRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == RESIDUOSITY_HEADER {
            continue;
        }
        let bad = || Error::Config(format!("residuosity CSV line {}: malformed row '{line}'", i + 1));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad().into());
        }
        let observed: f64 = f[4].parse().map_err(|_| bad())?;
        rows.push(RatioRow {
            p: f[0].parse().map_err(|_| bad())?,
            ap: f[1].parse().map_err(|_| bad())?,
            residues: f[2].parse().map_err(|_| bad())?,
            nonresidues: f[3].parse().map_err(|_| bad())?,
            observed: (!observed.is_nan()).then_some(observed),
            predicted: f[5].parse().map_err(|_| bad())?,
        });
    }
    Ok(rows)
}

fn fit_k(a: FitKArgs) -> Result<()> {
    let (bytes, digest) = read_input(&a.input)?;
    let rows = parse_ratio_rows(&String::from_utf8_lossy(&bytes))?;
    let fit = stats::fit_k(&rows)?;
    let mut out = Report::new(digest, None);
    out.note(format!("rows: {}", rows.len()));
    out.row("estimate,std_error,samples");
    out.row(format!("{},{},{}", num(fit.estimate), num(fit.std_error), fit.samples));
    out.finish(a.out.out.as_deref(), &[])
}

fn heegner(a: HeegnerArgs) -> Result<()> {
    let s = models::heegner_sum_model(HeegnerParams { h: a.h, trials: a.trials, seed: a.seed })?;
    let mut out = Report::new(sha256_hex(b""), Some(a.seed));
    out.row("h,trials,mean,variance,std_error_of_mean");
    let sem = (s.variance / s.trials as f64).sqrt();
    out.row(format!("{},{},{},{},{}", s.h, s.trials, num(s.mean), num(s.variance), num(sem)));
    out.finish(a.out.out.as_deref(), &[])
}

fn granville(a: GranvilleArgs) -> Result<()> {
    let (ca, cb, digest) = match (&a.curve, a.a, a.b) {
        (Some(path), _, _) => {
            let (cfg, digest) = load_curve(path)?;
            let s = cfg.short_model()?;
            if !s.is_integral() {
                return Err(Error::Config(format!("short model of {} is not integral; pass --a and --b", cfg.label)).into());
            }
            let a = i64::try_from(s.a.to_integer()).map_err(|_| Error::Overflow("A".into()))?;
            let b = i64::try_from(s.b.to_integer()).map_err(|_| Error::Overflow("B".into()))?;
            (a, b, digest)
        }
        (None, Some(a), Some(b)) => (a, b, sha256_hex(format!("A={a} B={b}").as_bytes())),
        _ => return Err(usage("pass --curve or both --a and --b")),
    };
    let quadrants = match a.quadrants {
        QuadrantsArg::All => Quadrants::All,
        QuadrantsArg::Positive => Quadrants::Positive,
    };
    let bx = GranvilleBox { a: ca, b: cb, d_range: (a.dmin, a.dmax), x_range: (a.xmin, a.xmax), quadrants, fundamental_only: a.fundamental };
    let count = models::granville_count(&bx, a.budget)?;
    let mut out = Report::new(digest, None);
    out.row("a,b,dmin,dmax,xmin,xmax,quadrants,fundamental,pairs,count");
    let q = match quadrants {
        Quadrants::All => "all",
        Quadrants::Positive => "positive",
    };
    out.row(format!("{ca},{cb},{},{},{},{},{q},{},{},{count}", a.dmin, a.dmax, a.xmin, a.xmax, a.fundamental, bx.pairs()));
    out.finish(a.out.out.as_deref(), &[])
}

fn predict(a: PredictArgs) -> Result<()> {
    let (scheme, name, param) = match a.scheme {
        SchemeArg::EvenRank2 => (Scheme::EvenRank2, "even-rank2", String::new()),
        SchemeArg::Theta => {
            let t = a.theta.ok_or_else(|| usage("--scheme theta needs --theta"))?;
            (Scheme::Theta(t), "theta", num(t))
        }
        SchemeArg::Granville => {
            let r = a.r.ok_or_else(|| usage("--scheme granville needs --r"))?;
            (Scheme::Granville(r), "granville", r.to_string())
        }
    };
    let v = models::rank_count_prediction(a.x, scheme)?;
    let mut out = Report::new(sha256_hex(b""), None);
    out.row("scheme,x,parameter,prediction");
    out.row(format!("{name},{},{param},{}", num(a.x), num(v)));
    out.finish(a.out.out.as_deref(), &[])
}

const BSD_HEADER: &str = "d,parity,value,error,omega,tamagawa,torsion,regulator,point_x,point_y,sha,nearest_square,residual,status";

fn bsd_row(d: i64, par: Parity, v: &LValue, inv: &BsdInvariants, gen: Option<&HeightResult>) -> String {
    let (px, py) = gen.map(|h| (h.point.x.to_string(), h.point.y.to_string())).unwrap_or_default();
    let status = if inv.higher_rank { "higher_rank" } else { "ok" };
    format!(
        "{d},{},{},{},{},{},{},{},{px},{py},{},{},{},{status}",
        par.name(),
        num(v.value),
        num(v.error),
        num(inv.omega),
        inv.tamagawa,
        inv.torsion,
        num(inv.regulator),
        num(inv.sha),
        inv.nearest_square,
        num(inv.residual)
    )
}

fn generator(cfg: &CurveConfig, d: i64, point: Option<&str>, bound: u64) -> Result<Option<HeightResult>> {
    let model = cfg.model.twist(d)?;
    match point {
        Some(s) => Ok(Some(bsd::canonical_height(&model, &RationalPoint::parse(s)?)?)),
        None => Ok(bsd::find_generator(&model, bound)?),
    }
}

fn bsd_one(a: BsdArgs) -> Result<()> {
    let (cfg, digest) = load_curve(&a.curve)?;
    let spec = TwistSpec::new(&cfg, a.twist)?;
    let r = spec.parity.order();
    let m = lfunc::terms_needed(spec.conductor as f64, r, 0.5 * a.eps);
    let tab = table(&cfg, m, a.provider)?;
    let v = twist_value(&cfg, &tab, a.twist, r, a.eps)?;
    let mut out = Report::new(digest, None);
    out.note(format!("curve: {}", cfg.label));
    let (inv, gen) = if a.twist == 1 {
        if spec.parity != Parity::Even {
            return Err(usage("the base curve has odd parity; pass --twist"));
        }
        (bsd::base_sha(&cfg, v.value)?, None)
    } else {
        let tam = bsd::tamagawa_twist(&cfg, a.twist)?;
        let local: Vec<String> = tam.local.iter().map(|(p, c)| format!("{p}:{c}")).collect();
        out.note(format!("local tamagawa: {}", local.join(" ")));
        if !tam.copied.is_empty() {
            let copied: Vec<String> = tam.copied.iter().map(u64::to_string).collect();
            out.note(format!("additive factors copied from configuration at: {}", copied.join(" ")));
        }
        match spec.parity {
            Parity::Even => (bsd::even_twist_sha(&cfg, a.twist, v.value, a.tau)?, None),
            Parity::Odd => {
                let g = generator(&cfg, a.twist, a.point.as_deref(), a.search_bound)?.ok_or_else(|| {
                    usage(format!("no nontorsion point with naive height bound {}; pass --point", a.search_bound))
                })?;
                out.note(format!("height multiplier: {}", g.multiplier));
                out.note(format!("height error: {}", num(g.error)));
                (bsd::odd_twist_sha(&cfg, a.twist, v.value, &g)?, Some(g))
            }
        }
    };
    out.row(BSD_HEADER);
    out.row(bsd_row(a.twist, spec.parity, &v, &inv, gen.as_ref()));
    out.finish(a.out.out.as_deref(), &[])
}

fn bsd_scan(a: BsdScanArgs) -> Result<()> {
    let (cfg, digest) = load_curve(&a.curve)?;
    let want = parity(a.parity);
    let ds: Vec<(i64, Parity)> = enumerate_fundamental(a.xmax, Signs::Both)
        .into_iter()
        .filter(|d| d.unsigned_abs() > 8 && check_eligible(&cfg, *d).is_ok())
        .filter_map(|d| twist::twist_parity(&cfg, d).ok().map(|p| (d, p)))
        .filter(|(_, p)| want.is_none_or(|w| w == *p))
        .collect();
    let top = ds.iter().map(|(d, _)| d.unsigned_abs()).max().unwrap_or(1) as f64;
    let n = cfg.conductor as f64 * top * top;
    let m = ds.iter().map(|(_, p)| lfunc::terms_needed(n, p.order(), 0.5 * a.eps)).max().unwrap_or(1);
    let tab = table(&cfg, m, a.provider)?;
    let rows: Vec<Result<String>> = ds
        .par_iter()
        .map(|&(d, par)| {
            let v = twist_value(&cfg, &tab, d, par.order(), a.eps)?;
            match par {
                Parity::Even => Ok(bsd_row(d, par, &v, &bsd::even_twist_sha(&cfg, d, v.value, a.tau)?, None)),
                Parity::Odd => {
                    if v.value.abs() <= lfunc::rank_threshold(a.tau, v.conductor, 1) {
                        let t = bsd::twist_arithmetic(&cfg, d)?;
                        let inv = bsd::sha_estimate_even(d, 0.0, t.periods.real, t.tamagawa.product, t.torsion, 1.0);
                        return Ok(bsd_row(d, par, &v, &inv, None));
                    }
                    match generator(&cfg, d, None, a.search_bound)? {
                        Some(g) => Ok(bsd_row(d, par, &v, &bsd::odd_twist_sha(&cfg, d, v.value, &g)?, Some(&g))),
                        None => {
                            let t = bsd::twist_arithmetic(&cfg, d)?;
                            Ok(format!(
                                "{d},{},{},{},{},{},{},nan,,,nan,,nan,no_generator",
                                par.name(),
                                num(v.value),
                                num(v.error),
                                num(t.periods.real),
                                t.tamagawa.product,
                                t.torsion
                            ))
                        }
                    }
                }
            }
        })
        .collect();
    let mut out = Report::new(digest, None);
    out.note(format!("curve: {}", cfg.label));
    out.note(format!("twists: {}", ds.len()));
    out.note(format!("base_terms: {}", tab.len()));
    out.row(BSD_HEADER);
    for row in rows {
        out.row(row?);
    }
    out.finish(a.out.out.as_deref(), &[])
}
