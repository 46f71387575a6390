//! 0-1 knapsack with unknown profits, solved by take/skip branching.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{self, LearnNode, Sense, SolveNode, Solved};
use crate::problem::{check_len, GammaParam, Problem};
use crate::pwl::{CombineOp, ExtReal, Interval, LinearFn, PiecewiseInfo, PwlFunction};

/// Items and budget of a knapsack; the profits are the unknown parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knapsack {
    pub costs: Vec<f64>,
    pub budget: f64,
}

impl Knapsack {
    pub fn new(costs: Vec<f64>, budget: f64) -> Result<Self> {
        if costs.len() > 64 {
            return Err(Error::InvalidInstance("at most 64 items are supported".into()));
        }
        if costs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) || !budget.is_finite() {
            return Err(Error::InvalidInstance(
                "costs must be finite and nonnegative, budget finite".into(),
            ));
        }
        Ok(Knapsack { costs, budget })
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }
}

/// Chosen item indices in increasing order.
pub type Selection = Vec<usize>;

fn members(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

/// A subproblem: decide items `0..remaining` with `budget` left, having
/// already chosen `chosen`.
struct Node<'a, T> {
    profits: &'a [T],
    costs: &'a [f64],
    remaining: usize,
    budget: f64,
    chosen: u64,
}

impl<T> Node<'_, T> {
    // A negative budget means the last item taken overshot; stopping at
    // zero instead would lose zero-cost items.
    fn at_base(&self) -> bool {
        self.remaining == 0 || self.budget < 0.0
    }

    fn children(&self) -> Vec<Self> {
        let item = self.remaining - 1;
        let child = |budget, chosen| Node {
            profits: self.profits,
            costs: self.costs,
            remaining: item,
            budget,
            chosen,
        };
        vec![
            child(self.budget, self.chosen),
            child(self.budget - self.costs[item], self.chosen | 1 << item),
        ]
    }
}

impl SolveNode for Node<'_, f64> {
    type Solution = u64;
    type Info = ();

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn is_base(&self) -> bool {
        self.at_base()
    }

    fn base_result(&self) -> Solved<u64> {
        if self.budget < 0.0 {
            return Solved {
                solution: 0,
                objective: ExtReal::ZERO,
            };
        }
        let total = members(self.chosen).map(|i| self.profits[i]).sum::<f64>();
        Solved {
            solution: self.chosen,
            objective: total.into(),
        }
    }

    fn extract(&self) {}

    fn branch(&self, _: &()) -> Vec<Self> {
        self.children()
    }
}

impl LearnNode for Node<'_, GammaParam> {
    type Info = ();

    fn reduce_op(&self) -> CombineOp {
        CombineOp::Max
    }

    fn is_base(&self) -> bool {
        self.at_base()
    }

    fn base_result(&self, domain: Interval) -> Result<PwlFunction> {
        if self.budget < 0.0 {
            return Ok(PwlFunction::zero(domain));
        }
        let mut est = LinearFn::constant(0.0);
        let mut payload = 0.0;
        for i in members(self.chosen) {
            est = est.checked_add(&self.profits[i].line)?;
            payload += self.profits[i].truth;
        }
        Ok(PwlFunction::linear(domain, est, payload))
    }

    fn extract(&self, domain: Interval) -> Result<PiecewiseInfo<()>> {
        Ok(PiecewiseInfo::single(domain, ()))
    }

    fn branch(&self, _: &()) -> Vec<Self> {
        self.children()
    }
}

impl Knapsack {
    fn root<'a, T>(&'a self, profits: &'a [T]) -> Node<'a, T> {
        Node {
            profits,
            costs: &self.costs,
            remaining: self.costs.len(),
            budget: self.budget,
            chosen: 0,
        }
    }
}

impl Problem for Knapsack {
    type Solution = Selection;

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn param_count(&self) -> usize {
        self.costs.len()
    }

    fn solve(&self, theta: &[f64]) -> Result<Solved<Selection>> {
        check_len(theta, self.len())?;
        let r = framework::resolve(&self.root(theta))?;
        Ok(Solved {
            solution: members(r.solution).collect(),
            objective: r.objective,
        })
    }

    fn objective(&self, solution: &Selection, theta: &[f64]) -> Result<f64> {
        check_len(theta, self.len())?;
        Ok(solution.iter().map(|&i| theta[i]).sum())
    }

    fn relearn(&self, params: &[GammaParam], domain: Interval) -> Result<PwlFunction> {
        check_len(params, self.len())?;
        framework::relearn(&self.root(params), domain)
    }
}

/// Best total profit by enumerating every subset; at most 20 items.
pub fn brute_ks(profits: &[f64], costs: &[f64], budget: f64) -> Result<f64> {
    let n = costs.len();
    if n > 20 {
        return Err(Error::TooLarge(format!("{n} items")));
    }
    check_len(profits, n)?;
    let mut best = 0.0f64;
    for mask in 0u32..1 << n {
        let (mut p, mut c) = (0.0, 0.0);
        for i in 0..n {
            if mask >> i & 1 == 1 {
                p += profits[i];
                c += costs[i];
            }
        }
        if c <= budget && p > best {
            best = p;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::regret;

    fn example() -> Knapsack {
        Knapsack::new(vec![2.0, 2.0, 1.0, 1.0], 3.0).unwrap()
    }

    #[test]
    fn small_example() {
        let r = example().solve(&[10.0, 8.0, 5.0, 4.0]).unwrap();
        assert_eq!(r.objective.value(), 15.0);
        assert_eq!(r.solution, vec![0, 2]);
        assert_eq!(
            brute_ks(&[10.0, 8.0, 5.0, 4.0], &example().costs, 3.0).unwrap(),
            15.0
        );
    }

    #[test]
    fn degenerate_cases() {
        let ks = Knapsack::new(vec![2.0, 2.0], 0.0).unwrap();
        let r = ks.solve(&[3.0, 4.0]).unwrap();
        assert_eq!(r.objective.value(), 0.0);
        assert!(r.solution.is_empty());

        let one = Knapsack::new(vec![1.0], 1.0).unwrap();
        assert_eq!(one.solve(&[7.0]).unwrap().objective.value(), 7.0);

        let none = Knapsack::new(vec![], 5.0).unwrap();
        assert_eq!(none.solve(&[]).unwrap().objective.value(), 0.0);
        assert_eq!(brute_ks(&[], &[], 5.0).unwrap(), 0.0);
        assert_eq!(brute_ks(&[3.0, 3.0], &[4.0, 5.0], 3.0).unwrap(), 0.0);
        assert!(brute_ks(&[0.0; 21], &[0.0; 21], 1.0).is_err());
    }

    #[test]
    fn zero_cost_item_at_zero_budget_is_taken() {
        let ks = Knapsack::new(vec![0.0, 3.0], 0.0).unwrap();
        assert_eq!(ks.solve(&[5.0, 9.0]).unwrap().objective.value(), 5.0);
    }

    #[test]
    fn regret_of_a_bad_estimate() {
        let ks = example();
        let r = regret(&ks, &[1.0, 9.0, 9.0, 1.0], &[10.0, 8.0, 5.0, 4.0]).unwrap();
        assert_eq!(r, 2.0);
        assert_eq!(
            regret(&ks, &[10.0, 8.0, 5.0, 4.0], &[10.0, 8.0, 5.0, 4.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn relearn_two_items() {
        let ks = Knapsack::new(vec![1.0, 1.0], 1.0).unwrap();
        let params = [
            GammaParam {
                line: LinearFn::new(1.0, 0.0),
                truth: 5.0,
            },
            GammaParam {
                line: LinearFn::constant(3.0),
                truth: 3.0,
            },
        ];
        let d = Interval::new(0.0, 10.0).unwrap();
        let f = ks.relearn(&params, d).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.pieces()[0].interval, Interval::new(0.0, 3.0).unwrap());
        assert_eq!(f.pieces()[0].est, LinearFn::constant(3.0));
        assert_eq!(f.pieces()[0].payload.value(), 3.0);
        assert_eq!(f.pieces()[1].est, LinearFn::new(1.0, 0.0));
        assert_eq!(f.pieces()[1].payload.value(), 5.0);
    }

    #[test]
    fn relearn_with_constant_profits_is_one_piece() {
        let ks = example();
        let params: Vec<_> = [10.0, 8.0, 5.0, 4.0]
            .iter()
            .map(|&p| GammaParam {
                line: LinearFn::constant(p),
                truth: p,
            })
            .collect();
        let f = ks.relearn(&params, Interval::REAL_LINE).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.pieces()[0].est, LinearFn::constant(15.0));
        assert_eq!(f.pieces()[0].payload.value(), 15.0);
    }
}
