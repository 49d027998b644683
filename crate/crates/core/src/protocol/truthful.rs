use num_bigint::BigInt;

use super::{execute, BidderInput, Protocol, ProtocolError, DEFAULT_MAX_ROUNDS};
use crate::setcore::Rational;
use crate::valuation::BxosValuation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bidder {
    Alice,
    Bob,
}

/// A profitable deviation: the deviating bidder truly holds `truth` (index into the
/// valuation list), faces `opponent`, and reports `report` instead.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub bidder: Bidder,
    pub truth: usize,
    pub opponent: usize,
    pub report: usize,
    /// Utility of deviating minus utility of reporting truthfully (positive).
    pub gain: Rational,
}

/// Checks the ex-post Nash condition for both bidders over every triple in `vals³`.
pub fn check_truthful(p: &dyn Protocol, vals: &[BxosValuation]) -> Result<Vec<Violation>, ProtocolError> {
    let k = vals.len();
    let inputs: Vec<BidderInput> = vals.iter().cloned().map(BidderInput::new).collect();
    // Outcome per (Alice report, Bob report).
    let mut table = Vec::with_capacity(k * k);
    for a in &inputs {
        for b in &inputs {
            table.push(execute(p, a, b, DEFAULT_MAX_ROUNDS)?);
        }
    }
    let utility = |bidder: Bidder, holder: usize, ra: usize, rb: usize| -> Rational {
        let out = &table[ra * k + rb];
        let (bundle, price) = match bidder {
            Bidder::Alice => (&out.allocation.to_alice, &out.prices.0),
            Bidder::Bob => (&out.allocation.to_bob, &out.prices.1),
        };
        Rational::from_integer(BigInt::from(vals[holder].value(bundle))) - price
    };
    let mut violations = Vec::new();
    for truth in 0..k {
        for opponent in 0..k {
            for report in 0..k {
                let honest_a = utility(Bidder::Alice, truth, truth, opponent);
                let dev_a = utility(Bidder::Alice, truth, report, opponent);
                if dev_a > honest_a {
                    violations.push(Violation {
                        bidder: Bidder::Alice,
                        truth,
                        opponent,
                        report,
                        gain: dev_a - honest_a,
                    });
                }
                let honest_b = utility(Bidder::Bob, truth, opponent, truth);
                let dev_b = utility(Bidder::Bob, truth, opponent, report);
                if dev_b > honest_b {
                    violations.push(Violation {
                        bidder: Bidder::Bob,
                        truth,
                        opponent,
                        report,
                        gain: dev_b - honest_b,
                    });
                }
            }
        }
    }
    Ok(violations)
}
