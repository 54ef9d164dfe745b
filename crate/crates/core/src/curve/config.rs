//! Flat `key = value` curve configuration files.
//!
//! ```text
//! label = 11a1
//! ainvs = 0 -1 1 -10 -20      # or a1 = .., a2 = .., a3 = .., a4 = .., a6 = ..
//! conductor = 11
//! sign = +1
//! torsion = 5
//! local = 11 split 5 5        # p kodaira c ordDelta, one line per p | N
//! eta = 1:2,11:2              # optional
//! omega = 1.2692093           # optional real period
//! omega_vol = 1.8515          # optional lattice area
//! ```

use super::{CurveConfig, EtaQuotientSpec, LocalData, Reduction, Weierstrass};
use crate::error::{Error, Result};

fn int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim_start_matches('+')
        .parse::<T>()
        .map_err(|_| Error::Config(format!("{key}: cannot parse integer from '{v}'")))
}

fn real(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Config(format!("{key}: cannot parse real from '{v}'")))
}

pub(super) fn parse(text: &str) -> Result<CurveConfig> {
    let mut label = None;
    let mut a: [Option<i128>; 5] = [None; 5];
    let mut conductor = None;
    let mut sign = None;
    let mut torsion = None;
    let mut local = Vec::new();
    let mut eta = None;
    let mut real_period = None;
    let mut omega_vol = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => return Err(Error::Config(format!("line {}: expected 'key = value'", lineno + 1))),
        };
        match key {
            "label" => label = Some(value.to_string()),
            "ainvs" => {
                let parts: Vec<&str> = value.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
                if parts.len() != 5 {
                    return Err(Error::Config(format!("ainvs needs 5 integers, got {}", parts.len())));
                }
                for (slot, p) in a.iter_mut().zip(parts) {
                    *slot = Some(int(key, p)?);
                }
            }
            "a1" => a[0] = Some(int(key, value)?),
            "a2" => a[1] = Some(int(key, value)?),
            "a3" => a[2] = Some(int(key, value)?),
            "a4" => a[3] = Some(int(key, value)?),
            "a6" => a[4] = Some(int(key, value)?),
            "N" | "conductor" => conductor = Some(int::<u64>(key, value)?),
            "sign" => sign = Some(int::<i8>(key, value)?),
            "torsion" => torsion = Some(int::<u32>(key, value)?),
            "local" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                if parts.len() != 4 {
                    return Err(Error::Config(format!("local data line needs 'p kodaira c ordDelta', got '{value}'")));
                }
                let reduction = Reduction::parse(parts[1])
                    .ok_or_else(|| Error::Config(format!("unknown reduction type '{}'", parts[1])))?;
                local.push(LocalData {
                    prime: int(key, parts[0])?,
                    reduction,
                    tamagawa: int(key, parts[2])?,
                    ord_disc: int(key, parts[3])?,
                });
            }
            "eta" => eta = Some(EtaQuotientSpec::parse(value)?),
            "omega" => real_period = Some(real(key, value)?),
            "omega_vol" => omega_vol = Some(real(key, value)?),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
    }

    let coeff = |i: usize, name: &str| a[i].ok_or_else(|| Error::Config(format!("missing {name}")));
    let model = Weierstrass::new(coeff(0, "a1")?, coeff(1, "a2")?, coeff(2, "a3")?, coeff(3, "a4")?, coeff(4, "a6")?);
    let cfg = CurveConfig {
        label: label.unwrap_or_else(|| model.to_string()),
        model,
        conductor: conductor.ok_or_else(|| Error::Config("missing conductor".into()))?,
        sign: sign.ok_or_else(|| Error::Config("missing sign".into()))?,
        local,
        torsion: torsion.unwrap_or(1),
        real_period,
        omega_vol,
        eta,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub(super) fn render(cfg: &CurveConfig) -> String {
    let w = &cfg.model;
    let mut s = format!(
        "label = {}\nainvs = {} {} {} {} {}\nconductor = {}\nsign = {:+}\ntorsion = {}\n",
        cfg.label, w.a1, w.a2, w.a3, w.a4, w.a6, cfg.conductor, cfg.sign, cfg.torsion
    );
    for l in &cfg.local {
        s.push_str(&format!("local = {} {} {} {}\n", l.prime, l.reduction.name(), l.tamagawa, l.ord_disc));
    }
    if let Some(e) = &cfg.eta {
        s.push_str(&format!("eta = {e}\n"));
    }
    if let Some(o) = cfg.real_period {
        s.push_str(&format!("omega = {o}\n"));
    }
    if let Some(o) = cfg.omega_vol {
        s.push_str(&format!("omega_vol = {o}\n"));
    }
    s
}
