//! Classical references under the L1 imbalance cost: recourse by
//! enumeration, expected cost of a fixed commitment, RP, EV and EEV.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::scenarios::TestScenarioSet;
use crate::ucp::{classical_l1_cost, Bits, UcpParams};
use crate::{Error, Result};

/// Largest unit count accepted by the exhaustive searches.
pub const MAX_UNITS: usize = 20;

/// The 18 imbalance-cost values 30, 40, ..., 200.
pub fn lambda_grid() -> Vec<f64> {
    (0..18).map(|k| 30.0 + 10.0 * k as f64).collect()
}

fn check(x: &Bits, params: &UcpParams) -> Result<()> {
    params.validate()?;
    if x.len() != params.units() {
        return Err(Error::LengthMismatch {
            expected: params.units(),
            found: x.len(),
        });
    }
    if x.len() > MAX_UNITS {
        return Err(Error::Capacity {
            what: "units",
            requested: x.len(),
            max: MAX_UNITS,
        });
    }
    Ok(())
}

fn startup(x: &Bits, params: &UcpParams) -> f64 {
    (0..x.len()).filter(|&i| x.get(i)).map(|i| params.startup_cost[i]).sum()
}

/// Cheapest two-level dispatch for commitment `x` at realization `xi`.
/// Returns the outputs and the recourse cost (generation plus imbalance,
/// no start-up). Ties keep the lexicographically smallest level choice,
/// unit 1 first, `P_min` before `P_max`.
pub fn second_stage_best(x: &Bits, xi: f64, params: &UcpParams) -> Result<(Vec<f64>, f64)> {
    check(x, params)?;
    let on: Vec<usize> = (0..x.len()).filter(|&i| x.get(i)).collect();
    let k = on.len();
    let s = startup(x, params);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for levels in 0..1usize << k {
        let mut y = alloc::vec![0.0; x.len()];
        for (pos, &i) in on.iter().enumerate() {
            // the first committed unit is the most significant choice
            let high = levels >> (k - 1 - pos) & 1 == 1;
            y[i] = if high { params.p_max[i] } else { params.p_min[i] };
        }
        let cost = classical_l1_cost(x, &y, xi, params)? - s;
        if best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((y, cost));
        }
    }
    Ok(best.expect("at least one level combination"))
}

/// Start-up cost plus the scenario-weighted best recourse.
pub fn expected_cost(x: &Bits, test: &TestScenarioSet, params: &UcpParams) -> Result<f64> {
    check(x, params)?;
    let mut total = startup(x, params);
    for (&xi, &p) in test.xi.iter().zip(&test.probs) {
        total += p * second_stage_best(x, xi, params)?.1;
    }
    Ok(total)
}

fn all_commitments(m: usize) -> impl Iterator<Item = Bits> {
    (0..1usize << m).map(move |k| Bits::from_index(k, m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpSolution {
    pub x: Bits,
    pub value: f64,
    /// Expected cost of every commitment, in basis-index order.
    pub per_x: Vec<(Bits, f64)>,
}

/// Exhaustive recourse problem. Ties go to the smallest basis index.
pub fn solve_rp(test: &TestScenarioSet, params: &UcpParams) -> Result<RpSolution> {
    let m = params.units();
    let per_x = all_commitments(m)
        .map(|x| expected_cost(&x, test, params).map(|c| (x, c)))
        .collect::<Result<Vec<_>>>()?;
    let (x, value) = per_x
        .iter()
        .fold(None::<&(Bits, f64)>, |acc, e| match acc {
            Some(a) if a.1 <= e.1 => Some(a),
            _ => Some(e),
        })
        .cloned()
        .expect("at least one commitment");
    Ok(RpSolution { x, value, per_x })
}

/// Deterministic problem at a single scenario `xi_mean`: commitment and
/// its total cost.
pub fn solve_ev(xi_mean: f64, params: &UcpParams) -> Result<(Bits, f64)> {
    let mut best: Option<(Bits, f64)> = None;
    for x in all_commitments(params.units()) {
        let c = startup(&x, params) + second_stage_best(&x, xi_mean, params)?.1;
        if best.as_ref().is_none_or(|(_, b)| c < *b) {
            best = Some((x, c));
        }
    }
    Ok(best.expect("at least one commitment"))
}

/// Expected cost of the mean-scenario commitment.
pub fn eev(test: &TestScenarioSet, params: &UcpParams) -> Result<f64> {
    let (x, _) = solve_ev(test.mean(), params)?;
    expected_cost(&x, test, params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub lambda: f64,
    pub rp_value: f64,
    pub rp_solution: Bits,
    pub ev_solution: Bits,
    pub eev_value: f64,
    pub per_x_costs: Vec<(Bits, f64)>,
}

pub fn evaluate(test: &TestScenarioSet, params: &UcpParams) -> Result<EvaluationReport> {
    let rp = solve_rp(test, params)?;
    let (ev_solution, _) = solve_ev(test.mean(), params)?;
    let eev_value = rp
        .per_x
        .iter()
        .find(|(x, _)| *x == ev_solution)
        .map(|(_, c)| *c)
        .expect("every commitment is costed");
    Ok(EvaluationReport {
        lambda: params.lambda,
        rp_value: rp.value,
        rp_solution: rp.x,
        ev_solution,
        eev_value,
        per_x_costs: rp.per_x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn bits(s: &str) -> Bits {
        s.parse().unwrap()
    }

    fn test_set() -> TestScenarioSet {
        TestScenarioSet::from_values((0..200).map(|k| 20.0 + 12.0 * k as f64).collect()).unwrap()
    }

    #[test]
    fn grid_has_eighteen_points() {
        let g = lambda_grid();
        assert_eq!(g.len(), 18);
        assert_eq!(g[0], 30.0);
        assert_eq!(g[17], 200.0);
    }

    #[test]
    fn hand_enumerated_dispatch() {
        let p = UcpParams::case_study(30.0);
        let (y, c) = second_stage_best(&bits("110"), 750.0, &p).unwrap();
        assert_eq!(y, vec![750.0, 1000.0, 0.0]);
        assert_eq!(c, 31250.0);
        let (y, c) = second_stage_best(&bits("000"), 300.0, &p).unwrap();
        assert_eq!(y, vec![0.0; 3]);
        assert_eq!(c, 30.0 * 2200.0);
    }

    #[test]
    fn tiny_lambda_prefers_minimum_levels() {
        let p = UcpParams::case_study(1e-6);
        let (y, _) = second_stage_best(&bits("111"), 750.0, &p).unwrap();
        assert_eq!(y, p.p_min);
    }

    #[test]
    fn ev_example() {
        let p = UcpParams::case_study(30.0);
        let (x, v) = solve_ev(750.0, &p).unwrap();
        assert_eq!(x.to_string(), "110");
        assert_eq!(v, 40250.0);
        assert_eq!(solve_ev(2500.0, &p).unwrap().0.to_string(), "000");
        assert_eq!(solve_ev(0.0, &UcpParams::case_study(1e4)).unwrap().0.to_string(), "111");
    }

    #[test]
    fn expected_cost_special_cases() {
        let p = UcpParams::case_study(50.0);
        let single = TestScenarioSet::from_values(vec![600.0]).unwrap();
        let x = bits("101");
        let direct = 5000.0 + second_stage_best(&x, 600.0, &p).unwrap().1;
        assert_eq!(expected_cost(&x, &single, &p).unwrap(), direct);
        let t = test_set();
        let none: f64 = t.xi.iter().map(|xi| 50.0 * (2500.0 - xi).abs()).sum::<f64>() / 200.0;
        assert!((expected_cost(&bits("000"), &t, &p).unwrap() - none).abs() < 1e-6);
    }

    #[test]
    fn rp_is_the_minimum_and_below_eev() {
        let t = test_set();
        for lambda in lambda_grid() {
            let p = UcpParams::case_study(lambda);
            let r = evaluate(&t, &p).unwrap();
            assert_eq!(r.per_x_costs.len(), 8);
            let min = r.per_x_costs.iter().map(|(_, c)| *c).fold(f64::INFINITY, f64::min);
            assert_eq!(r.rp_value, min);
            assert!(r.rp_value <= r.eev_value);
            assert_eq!(r.eev_value, eev(&t, &p).unwrap());
        }
    }

    #[test]
    fn zero_lambda_commits_nothing() {
        let r = solve_rp(&test_set(), &UcpParams::case_study(0.0)).unwrap();
        assert_eq!(r.x.to_string(), "000");
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn expected_cost_grows_with_lambda() {
        let t = test_set();
        for k in 0..8 {
            let x = Bits::from_index(k, 3);
            let mut last = f64::NEG_INFINITY;
            for lambda in lambda_grid() {
                let c = expected_cost(&x, &t, &UcpParams::case_study(lambda)).unwrap();
                assert!(c >= last);
                last = c;
            }
        }
    }

    #[test]
    fn recourse_is_continuous_in_xi() {
        // slopes are bounded by lambda, so no jumps on a fine sweep
        let p = UcpParams::case_study(40.0);
        let x = bits("111");
        let h = 0.5;
        let mut prev = second_stage_best(&x, 0.0, &p).unwrap().1;
        let mut xi = h;
        while xi <= 2500.0 {
            let c = second_stage_best(&x, xi, &p).unwrap().1;
            assert!((c - prev).abs() <= 40.0 * h + 1e-9);
            prev = c;
            xi += h;
        }
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(second_stage_best(&bits("11"), 0.0, &UcpParams::case_study(30.0)).is_err());
    }
}
