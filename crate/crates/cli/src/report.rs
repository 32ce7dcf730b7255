//! Report assembly: every command produces a self-contained JSON document
//! echoing the configuration that generated it, so a run can be reproduced
//! bit for bit.

use num_complex::Complex64;
use serde_json::{json, Value};

use dircomp_core::analysis::{
    compact_difference_check, compactness_verdict, contact_order, empirical_essential_norm,
    essential_lower_bound_difference, gamma_set, lincomb_obstruction, lincomb_verdict,
    same_component_check, characteristic_separation, Config,
};
use dircomp_core::bohr::GeneratorSet;
use dircomp_core::dsl;
use dircomp_core::kernels::{KernelPath, KernelSequencePlan, KernelSpec};
use dircomp_core::symbols::Symbol;
use dircomp_core::{Error, Result};

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn config_json(config: &Config) -> Value {
    serde_json::to_value(config).expect("config serializes")
}

fn symbol_json(text_source: Option<&str>, phi: &Symbol) -> Value {
    json!({
        "text": dsl::format(phi),
        "source": text_source,
        "json": serde_json::to_value(phi).expect("symbol serializes"),
        "class": serde_json::to_value(phi.classify()).expect("class serializes"),
        "degree": phi.degree(),
    })
}

/// Symbol analysis: membership, class, range, compactness, and the boundary
/// contact set with contact orders.
pub fn analyze(source: &str, phi: &Symbol, config: &Config) -> Result<Value> {
    phi.require_membership()?;
    let membership = phi.gh_membership()?;
    let range = phi.range_infimum(config.resolution, config.refine_tol)?;
    let verdict = compactness_verdict(phi, config)?;
    let generators = phi.natural_generators()?;
    let gamma = gamma_set(phi, &generators, config)?;
    let mut gamma_json = Vec::new();
    for point in &gamma {
        let contact = contact_order(phi, point, &generators, config)?;
        gamma_json.push(json!({
            "theta": point.theta,
            "z": point.z.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
            "defect": point.defect,
            "contact": serde_json::to_value(&contact).expect("contact serializes"),
        }));
    }
    Ok(json!({
        "command": "analyze",
        "config": config_json(config),
        "symbol": symbol_json(Some(source), phi),
        "membership": serde_json::to_value(&membership).expect("membership serializes"),
        "range": serde_json::to_value(&range).expect("range serializes"),
        "compactness": verdict.to_report_json(config),
        "gamma": gamma_json,
    }))
}

/// Single-prime angular-derivative scan: for every prime in the union
/// support and every contact point of the projected base symbol, the
/// essential-norm lower-bound check at the matching boundary height.
fn angular_scan(phi0: &Symbol, phi1: &Symbol, config: &Config) -> Result<Vec<Value>> {
    let mut out = Vec::new();
    let mut primes = Vec::new();
    for phi in [phi0, phi1] {
        for n in phi.psi().support() {
            if n > 1 {
                for &(p, _) in dircomp_core::numtheory::factorize(n)?.factors() {
                    if !primes.contains(&p) {
                        primes.push(p);
                    }
                }
            }
        }
    }
    primes.sort_unstable();
    for (base_index, base, other) in [(0usize, phi0, phi1), (1, phi1, phi0)] {
        for &q in &primes {
            let projected = base.project_q(&[q])?;
            if projected.psi().is_constant() {
                continue;
            }
            let gens = GeneratorSet::new(vec![q])?;
            for point in gamma_set(&projected, &gens, config)? {
                // `+ 0.0` turns a negative zero into a plain one.
                let alpha = -point.theta[0] / (q as f64).ln() + 0.0;
                match essential_lower_bound_difference(base, other, &[q], alpha, config) {
                    Ok(verdict) => out.push(json!({
                        "base_index": base_index,
                        "primes": [q],
                        "alpha": alpha,
                        "result": verdict.to_report_json(config),
                    })),
                    Err(Error::Precondition(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(out)
}

/// Pair comparison: separation note for mixed characteristics, otherwise the
/// angular scan, component and difference checks and the kernel estimator.
pub fn compare(
    sources: (&str, &str),
    phi0: &Symbol,
    phi1: &Symbol,
    config: &Config,
    estimator_k: u64,
    estimator_m: f64,
) -> Result<Value> {
    phi0.require_membership()?;
    phi1.require_membership()?;
    let base = json!({
        "command": "compare",
        "config": config_json(config),
        "symbols": [symbol_json(Some(sources.0), phi0), symbol_json(Some(sources.1), phi1)],
    });
    let mut report = base;

    if phi0.characteristic() != phi1.characteristic() {
        // Different characteristics never share a component; when one side is
        // zero the explicit separation bound is attached.
        let separation = if phi0.characteristic() == 0 {
            Some((0usize, characteristic_separation(phi0, phi1, 2)?))
        } else if phi1.characteristic() == 0 {
            Some((1usize, characteristic_separation(phi1, phi0, 2)?))
        } else {
            None
        };
        report["characteristics"] = json!({
            "equal": false,
            "note": "different characteristics never lie in one component",
            "separation": separation.map(|(idx, bound)| json!({
                "zero_characteristic_index": idx,
                "base": 2,
                "bound": bound,
            })),
        });
        return Ok(report);
    }

    report["characteristics"] = json!({ "equal": true, "separation": null });
    report["essential_bounds"] = Value::Array(angular_scan(phi0, phi1, config)?);
    report["same_component"] = same_component_check(phi0, phi1, config)?.to_report_json(config);
    report["compact_difference"] =
        compact_difference_check(phi0, phi1, config)?.to_report_json(config);

    // Kernel estimator along a slanted path over the smallest supporting
    // prime, when there is one.
    let mut smallest = None;
    for phi in [phi0, phi1] {
        for n in phi.psi().support() {
            if n > 1 {
                let p = dircomp_core::numtheory::factorize(n)?.factors()[0].0;
                smallest = Some(smallest.map_or(p, |s: u64| s.min(p)));
            }
        }
    }
    report["estimator"] = match smallest {
        Some(q) => {
            let plan = KernelSequencePlan {
                family: KernelSpec::PartialQ { primes: vec![q], w: Complex64::new(1.0, 0.0) },
                path: KernelPath::Slanted { m: estimator_m },
                k_start: 1,
                k_end: estimator_k,
                k_step: 1,
            };
            let estimate = empirical_essential_norm(phi0, phi1, &plan)?;
            json!({
                "plan": serde_json::to_value(&plan).expect("plan serializes"),
                "limit_estimate": estimate.limit_estimate,
                "tail_start_k": estimate.tail_start_k,
                "count": estimate.count,
            })
        }
        None => Value::Null,
    };
    Ok(report)
}

/// Linear combination: theorem-based verdict plus the boundary-data
/// obstruction table over the contact set of the first positive-
/// characteristic term.
pub fn lincomb(
    terms: &[(Complex64, String, Symbol)],
    config: &Config,
) -> Result<Value> {
    let symbols: Vec<Symbol> = terms.iter().map(|(_, _, s)| s.clone()).collect();
    let lambdas: Vec<Complex64> = terms.iter().map(|(l, _, _)| *l).collect();
    let verdict = lincomb_verdict(&symbols, &lambdas, config)?;

    // Obstruction table, with the reference rotated to a positive
    // characteristic when one exists.
    let mut obstructions = Vec::new();
    if let Some(reference) = symbols.iter().position(|s| s.characteristic() >= 1) {
        let mut rotated_symbols = vec![symbols[reference].clone()];
        let mut rotated_lambdas = vec![lambdas[reference]];
        let mut order = vec![reference];
        for (j, s) in symbols.iter().enumerate() {
            if j != reference {
                rotated_symbols.push(s.clone());
                rotated_lambdas.push(lambdas[j]);
                order.push(j);
            }
        }
        let all = rotated_symbols.clone();
        let gens = GeneratorSet::new(dircomp_core::numtheory::prime_basis(
            &all.iter()
                .flat_map(|s| s.psi().support().into_iter().filter(|&n| n > 1))
                .collect::<Vec<_>>(),
        )?)?;
        for point in gamma_set(&rotated_symbols[0], &gens, config)? {
            match lincomb_obstruction(&rotated_symbols, &rotated_lambdas, &point.theta, config) {
                Ok(obs) => obstructions.push(json!({
                    "theta": obs.theta,
                    "j_set": obs.j_set.iter().map(|&j| order[j]).collect::<Vec<_>>(),
                    "lambda_sum": complex_json(obs.lambda_sum),
                    "obstructed": obs.obstructed,
                    "reference_index": reference,
                })),
                Err(Error::NotOnBoundary(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    Ok(json!({
        "command": "lincomb",
        "config": config_json(config),
        "terms": terms.iter().map(|(l, src, s)| json!({
            "lambda": complex_json(*l),
            "symbol": symbol_json(Some(src), s),
        })).collect::<Vec<_>>(),
        "verdict": verdict.to_report_json(config),
        "obstructions": obstructions,
    }))
}
