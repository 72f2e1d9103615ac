//! Subcommand bodies and argument parsers.

use std::f64::consts::LN_2;
use std::path::Path;

use serde_json::{json, Value};
use walshcap::distinguisher::{monte_carlo, Decider};
use walshcap::infotheory::{
    capacity as ba_capacity, conjecture_check, detection_capacity_approx, detection_channel,
    general_capacity, renyi_divergence,
};
use walshcap::sampling::{mass_from_coefficients, Planner};
use walshcap::spectral::{fwt as transform, spectral_mass, top_of_spectrum};
use walshcap::{Distribution, RealSignal};

use crate::input::{self, LoadedInput, ValueKind};
use crate::report::{to_rounded, Envelope};
use crate::{CapacityArgs, CliError, FwtArgs, Method, PlanArgs, RenyiArgs, SimulateArgs};

/// Parses a decimal or `base^exponent`, e.g. `2^-6.2`; a leading minus
/// applies to the power, so `-2^-1` is `-0.5`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('^') {
        Some(_) if s.starts_with('-') => -parse_real(&s[1..])?,
        Some((base, exp)) => {
            let base: f64 = base
                .trim()
                .parse()
                .map_err(|_| format!("bad base in `{s}`"))?;
            let exp: f64 = exp
                .trim()
                .parse()
                .map_err(|_| format!("bad exponent in `{s}`"))?;
            base.powf(exp)
        }
        None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// Comma-separated reals, kept as one argument value.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffList(pub Vec<f64>);

pub fn parse_real_list(s: &str) -> Result<CoeffList, String> {
    s.split(',')
        .map(parse_real)
        .collect::<Result<_, _>>()
        .map(CoeffList)
}

/// Parses a nonnegative integer or `base^exponent` with integer parts.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    match s.split_once('^') {
        Some((base, exp)) => {
            let base: u64 = base
                .trim()
                .parse()
                .map_err(|_| format!("bad base in `{s}`"))?;
            let exp: u32 = exp
                .trim()
                .parse()
                .map_err(|_| format!("bad exponent in `{s}`"))?;
            base.checked_pow(exp)
                .ok_or_else(|| format!("`{s}` overflows u64"))
        }
        None => s
            .parse()
            .map_err(|_| format!("`{s}` is not a nonnegative integer")),
    }
}

fn load(path: &Path, normalized: bool) -> Result<LoadedInput, CliError> {
    input::load(path, normalized)
}

pub fn fwt(args: &FwtArgs) -> Result<Envelope, CliError> {
    if args.top == 0 {
        return Err(CliError::Usage("--top must be at least 1".into()));
    }
    let loaded = load(&args.input.input, args.input.normalized)?;
    let total = loaded.total();
    let scaled = args.normalize && loaded.kind == ValueKind::Counts;
    let values: Vec<f64> = if scaled {
        loaded.values.iter().map(|v| v / total).collect()
    } else {
        loaded.values.clone()
    };
    let spectrum = transform(&RealSignal::new(values)?);
    let n = spectrum.n();
    let k = args.top.min(spectrum.len() - 1);
    let top = if k == 0 {
        Vec::new()
    } else {
        top_of_spectrum(&spectrum, k)?
    };
    let top: Vec<Value> = top
        .into_iter()
        .map(
            |(mask, value)| json!({"index": mask.index(), "pattern": mask.bits(n), "value": value}),
        )
        .collect();

    let mut env = Envelope::new(
        "fwt",
        loaded.digest.clone(),
        json!({
            "n": n,
            "length": spectrum.len(),
            "total": total,
            "probabilities": scaled || loaded.kind == ValueKind::Probabilities,
            "spectrum": spectrum.coefficients(),
            "top": top,
        }),
    );
    if k < args.top {
        env.warn(format!(
            "only {k} nontrivial coefficients exist; --top {} truncated",
            args.top
        ));
    }
    Ok(env)
}

pub fn plan(args: &PlanArgs) -> Result<Envelope, CliError> {
    let planner = Planner::default();
    let budget = args
        .samples
        .map_or_else(|| "none".to_string(), |n| n.to_string());
    let (source, digest, plan) = if let Some(d) = args.bias {
        let digest = input::digest(format!("plan;bias={d:?};N={budget}").as_bytes());
        (
            json!({"kind": "bias", "value": d}),
            digest,
            planner.plan_for_bias(d, args.samples)?,
        )
    } else if let Some(mass) = args.mass {
        let digest = input::digest(format!("plan;mass={mass:?};N={budget}").as_bytes());
        (
            json!({"kind": "mass", "value": mass}),
            digest,
            planner.plan_for_mass(mass, args.samples)?,
        )
    } else if let Some(CoeffList(coeffs)) = &args.coeffs {
        let canonical: Vec<String> = coeffs.iter().map(|c| format!("{c:?}")).collect();
        let digest =
            input::digest(format!("plan;coeffs={};N={budget}", canonical.join(",")).as_bytes());
        let mass = mass_from_coefficients(coeffs)?;
        (
            json!({"kind": "coefficients", "value": coeffs}),
            digest,
            planner.plan_for_mass(mass, args.samples)?,
        )
    } else if let Some(path) = &args.input {
        let loaded = load(path, args.normalized)?;
        let f = loaded.distribution()?;
        (
            json!({"kind": "distribution", "n": f.n()}),
            loaded.digest,
            planner.plan_for_distribution(&f, args.samples)?,
        )
    } else {
        return Err(CliError::Usage(
            "one of --bias, --mass, --coeffs or --input is required".into(),
        ));
    };

    let mut env = Envelope::new(
        "plan",
        digest,
        json!({"source": source, "plan": to_rounded(&plan)}),
    );
    if args.samples.is_some() && !plan.condition_met {
        env.warn(format!(
            "budget of {} samples is below the {} required",
            plan.sample_budget, plan.min_samples
        ));
    }
    Ok(env)
}

pub fn capacity(args: &CapacityArgs) -> Result<Envelope, CliError> {
    let loaded = load(&args.input.input, args.input.normalized)?;
    let f = loaded.distribution()?;
    let mut warnings = Vec::new();
    let (method, bits, p0_star, upper, iterations, converged) = match args.method {
        Method::Approx => (
            "approx",
            detection_capacity_approx(&f),
            Some(0.5),
            None,
            None,
            None,
        ),
        Method::BlahutArimoto => {
            let r = ba_capacity(&detection_channel(&f))?;
            if !r.converged {
                warnings.push(format!(
                    "iteration stopped after {} steps before the bounds met",
                    r.iterations
                ));
            }
            (
                "blahut-arimoto",
                r.capacity_bits,
                Some(r.optimal_input[0]),
                Some(r.upper_bound_bits),
                Some(r.iterations),
                Some(r.converged),
            )
        }
        Method::General => {
            let r = general_capacity(&f)?;
            (
                "general",
                r.capacity_bits,
                Some(r.p0_star),
                None,
                None,
                None,
            )
        }
    };
    let mut env = Envelope::new(
        "capacity",
        loaded.digest,
        json!({
            "method": method,
            "n": f.n(),
            "spectral_mass": spectral_mass(&f),
            "capacity_bits": bits,
            "capacity_nats": bits * LN_2,
            "upper_bound_bits": upper,
            "p0_star": p0_star,
            "iterations": iterations,
            "converged": converged,
        }),
    );
    warnings.into_iter().for_each(|w| env.warn(w));
    Ok(env)
}

pub fn simulate(args: &SimulateArgs) -> Result<Envelope, CliError> {
    let loaded = load(&args.input.input, args.input.normalized)?;
    let f = loaded.distribution()?;
    let decider = Decider::from_name(&args.decider, args.alpha)?;
    let report = monte_carlo(&f, args.samples, args.trials, decider, args.seed)?;
    let mut env = Envelope::new("simulate", loaded.digest, to_rounded(&report));
    if report.low_sample {
        env.warn("sample count is small relative to the support; the chi-square threshold is approximate");
    }
    Ok(env)
}

pub fn renyi(args: &RenyiArgs) -> Result<Envelope, CliError> {
    let loaded = load(&args.input.input, args.input.normalized)?;
    let q = loaded.distribution()?;
    let uniform = Distribution::uniform(q.n());
    let divergence = renyi_divergence(&q, &uniform, args.alpha)?;
    let conjecture = if args.alpha == 0.5 {
        let c = conjecture_check(&q)?;
        Some(c)
    } else {
        None
    };
    let conjecture_json = conjecture.as_ref().map(|c| {
        json!({
            "d_half_nats": c.d_half_nats,
            "two_capacity_nats": c.two_capacity_nats,
            "ratio": c.ratio,
            "degenerate": c.degenerate,
            "capacity_bits": c.capacity.capacity_bits,
            "iterations": c.capacity.iterations,
            "converged": c.capacity.converged,
            "interpretation": c.interpretation,
        })
    });
    let mut env = Envelope::new(
        "renyi",
        loaded.digest,
        json!({
            "n": q.n(),
            "alpha": args.alpha,
            "divergence_nats": divergence,
            "conjecture": conjecture_json,
        }),
    );
    if let Some(c) = &conjecture {
        if c.degenerate {
            env.warn("distribution is uniform; both sides vanish and the ratio is undefined");
        } else if !c.capacity.converged {
            env.warn("capacity iteration stopped before the bounds met");
        }
    }
    if divergence.is_infinite() {
        env.warn("divergence is infinite");
    }
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(parse_real("0.015625"), Ok(0.015625));
        assert_eq!(parse_real("2^-6"), Ok(0.015625));
        assert_eq!(parse_real("2^-6.2"), Ok(2f64.powf(-6.2)));
        assert_eq!(parse_real("-2^-1"), Ok(-0.5));
        assert!(parse_real("x").is_err());
        assert!(parse_real("10^400").is_err());
        assert_eq!(
            parse_real_list("2^-1, 0.25"),
            Ok(CoeffList(vec![0.5, 0.25]))
        );
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("2^40"), Ok(1 << 40));
        assert_eq!(parse_count("555"), Ok(555));
        assert!(parse_count("2^64").is_err());
        assert!(parse_count("-1").is_err());
        assert!(parse_count("1.5").is_err());
    }
}
