//! Test support shared by the workspace: random valid systems and an
//! independent, deliberately naive Mamdani evaluator used as an oracle.

use permadss_core::{
    make_symmetric_partition, Clause, Connective, FisDefinition, FuzzyRule, Label, LinguisticVariable,
    MembershipFunction,
};
use rand::seq::IndexedRandom;
use rand::Rng;

const NAMES: [&str; 6] = ["alpha", "beta", "gamma", "delta", "eps", "zeta"];

fn random_range(rng: &mut impl Rng) -> (f64, f64) {
    let lo = match rng.random_range(0..3) {
        0 => 0.0,
        1 => rng.random_range(-1e3..1e3),
        _ => rng.random_range(-5.0..5.0f64).round(),
    };
    let width = if rng.random_bool(0.5) {
        rng.random_range(1..200) as f64
    } else {
        rng.random_range(1e-3..1e7)
    };
    (lo, lo + width)
}

/// Symmetric partition, sometimes with shoulder trapezoids swapped in at the
/// ends (coverage is kept).
fn random_variable(rng: &mut impl Rng, name: &str, max_labels: usize) -> LinguisticVariable {
    let (lo, hi) = random_range(rng);
    let n = rng.random_range(2..=max_labels);
    let base = make_symmetric_partition(name, lo, hi, &NAMES[..n]).unwrap();
    if !rng.random_bool(0.3) {
        return base;
    }
    let mut labels: Vec<Label> = base.labels().to_vec();
    let (_, _, _, d) = labels[0].mf.corners();
    let core_end = lo + (d - lo) * rng.random_range(0.0..0.5);
    labels[0].mf = MembershipFunction::trapezoidal(lo, lo, core_end, d).unwrap();
    LinguisticVariable::new(name, lo, hi, labels).unwrap()
}

pub fn random_system(rng: &mut impl Rng) -> FisDefinition {
    let n_inputs = rng.random_range(1..=3);
    let inputs: Vec<LinguisticVariable> = (0..n_inputs)
        .map(|i| random_variable(rng, &format!("in_{i}"), 5))
        .collect();
    let output = random_variable(rng, "OUT", 6);
    let n_rules = rng.random_range(1..=12);
    let rules: Vec<FuzzyRule> = (0..n_rules)
        .map(|_| {
            let mut antecedent = Vec::new();
            for var in &inputs {
                if antecedent.is_empty() || rng.random_bool(0.7) {
                    let label = var.labels().choose(rng).unwrap();
                    antecedent.push(Clause::new(var.name(), label.name.clone()));
                }
            }
            let connective = if rng.random_bool(0.3) {
                Connective::Or
            } else {
                Connective::And
            };
            let consequent = output.labels().choose(rng).unwrap();
            let weight = match rng.random_range(0..4) {
                0 => 0.5,
                1 => rng.random_range(0.05..1.0),
                _ => 1.0,
            };
            FuzzyRule::new(antecedent, connective, Clause::new("OUT", consequent.name.clone()))
                .with_weight(weight)
        })
        .collect();
    let mut builder = FisDefinition::builder(format!("random_{n_inputs}"))
        .output(output)
        .rules(rules)
        .resolution(rng.random_range(11..=1001));
    for var in inputs {
        builder = builder.input(var);
    }
    builder.build().unwrap()
}

pub fn random_point(rng: &mut impl Rng, fis: &FisDefinition) -> Vec<f64> {
    fis.inputs()
        .iter()
        .map(|v| rng.random_range(v.lo()..=v.hi()))
        .collect()
}

/// Straightforward Mamdani evaluation written independently of the engine:
/// every rule is clipped separately, the clipped sets are OR-ed pointwise on
/// `n` uniform samples, and the centroid uses the given quadrature.
pub fn naive_mamdani(fis: &FisDefinition, x: &[f64], n: usize, trapezoid: bool) -> Option<f64> {
    let out = fis.output();
    let mf = |var: &LinguisticVariable, label: &str| {
        var.labels().iter().find(|l| l.name == label).unwrap().mf
    };
    let clipped: Vec<(f64, MembershipFunction)> = fis
        .rules()
        .iter()
        .map(|rule| {
            let ds = rule.antecedent.iter().map(|c| {
                let i = fis.inputs().iter().position(|v| v.name() == c.variable).unwrap();
                mf(&fis.inputs()[i], &c.label).eval(x[i])
            });
            let s = match rule.connective {
                Connective::And => ds.fold(1.0, f64::min),
                Connective::Or => ds.fold(0.0, f64::max),
            };
            (s * rule.weight, mf(out, &rule.consequent.label))
        })
        .filter(|(s, _)| *s > 0.0)
        .collect();
    let (lo, hi) = (out.lo(), out.hi());
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let y = if i == n - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        };
        let mut mu = 0.0f64;
        for (s, m) in &clipped {
            mu = mu.max(s.min(m.eval(y)));
        }
        let w = if trapezoid && (i == 0 || i == n - 1) { 0.5 } else { 1.0 };
        num += w * y * mu;
        den += w * mu;
    }
    (den > 0.0).then(|| num / den)
}
