use num_bigint::BigInt;

use super::{BidderInput, BitMessage, Protocol, ProtocolError, SellerAction};
use crate::setcore::Rational;
use crate::valuation::{opt_clause_pair, Allocation, BxosValuation};

pub const DEFAULT_MAX_ROUNDS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    pub allocation: Allocation,
    pub prices: (Rational, Rational),
    pub rounds: usize,
    /// Bidder messages of every round plus seller replies of every round but the last.
    pub cc_bits: usize,
    pub alice_to_seller: Vec<BitMessage>,
    pub bob_to_seller: Vec<BitMessage>,
    pub seller_to_alice: Vec<BitMessage>,
    pub seller_to_bob: Vec<BitMessage>,
}

impl ProtocolOutcome {
    /// Recomputes the communication cost from the stored transcripts.
    pub fn transcript_bits(&self) -> usize {
        [
            &self.alice_to_seller,
            &self.bob_to_seller,
            &self.seller_to_alice,
            &self.seller_to_bob,
        ]
        .iter()
        .flat_map(|t| t.iter())
        .map(BitMessage::len)
        .sum()
    }

    pub fn is_simultaneous(&self) -> bool {
        self.rounds == 1
    }
}

pub fn execute(
    p: &dyn Protocol,
    alice: &BidderInput,
    bob: &BidderInput,
    max_rounds: usize,
) -> Result<ProtocolOutcome, ProtocolError> {
    if max_rounds == 0 {
        return Err(ProtocolError::ZeroRounds);
    }
    let width = alice.valuation.width();
    let (mut a_out, mut b_out) = (Vec::new(), Vec::new());
    let (mut a_in, mut b_in) = (Vec::new(), Vec::new());
    let mut cc = 0;
    for round in 1..=max_rounds {
        let ma = p.alice(alice, &a_in);
        let mb = p.bob(bob, &b_in);
        cc += ma.len() + mb.len();
        a_out.push(ma);
        b_out.push(mb);
        match p.seller(&a_out, &b_out) {
            SellerAction::Terminate => {
                let (to_alice, to_bob) = p.alloc(width, &a_out, &b_out);
                let allocation = Allocation::new(to_alice, to_bob).map_err(|_| ProtocolError::Overlap)?;
                let prices = p.price(&a_out, &b_out);
                return Ok(ProtocolOutcome {
                    allocation,
                    prices,
                    rounds: round,
                    cc_bits: cc,
                    alice_to_seller: a_out,
                    bob_to_seller: b_out,
                    seller_to_alice: a_in,
                    seller_to_bob: b_in,
                });
            }
            SellerAction::Reply { to_alice, to_bob } => {
                if p.is_simultaneous() {
                    return Err(ProtocolError::NotSimultaneous);
                }
                cc += to_alice.len() + to_bob.len();
                a_in.push(to_alice);
                b_in.push(to_bob);
            }
        }
    }
    Err(ProtocolError::RoundBudget(max_rounds))
}

/// Welfare of the outcome divided by the optimal welfare, or 0 when the optimum is 0.
pub fn approx_ratio(
    outcome: &ProtocolOutcome,
    va: &BxosValuation,
    vb: &BxosValuation,
) -> Result<Rational, ProtocolError> {
    let welfare = outcome.allocation.welfare(va, vb)?;
    let opt = opt_clause_pair(va, vb)?.value;
    if opt == 0 {
        return Ok(Rational::from_integer(BigInt::from(0)));
    }
    Ok(Rational::new(BigInt::from(welfare), BigInt::from(opt)))
}

#[cfg(test)]
mod tests {
    use super::super::{BidderInput, GrandBundle, Protocol, SellerAction};
    use super::*;
    use crate::setcore::{ratio, ItemSet};

    /// Keeps talking forever, or grabs overlapping bundles when asked to stop.
    struct Faulty {
        stop: bool,
        simultaneous: bool,
    }

    impl Protocol for Faulty {
        fn name(&self) -> &str {
            "faulty"
        }
        fn is_simultaneous(&self) -> bool {
            self.simultaneous
        }
        fn alice(&self, _: &BidderInput, _: &[BitMessage]) -> BitMessage {
            let mut m = BitMessage::empty();
            m.push_bit(true);
            m
        }
        fn bob(&self, _: &BidderInput, _: &[BitMessage]) -> BitMessage {
            BitMessage::empty()
        }
        fn seller(&self, _: &[BitMessage], _: &[BitMessage]) -> SellerAction {
            if self.stop {
                SellerAction::Terminate
            } else {
                let mut m = BitMessage::empty();
                m.push_uint(3, 2);
                SellerAction::Reply {
                    to_alice: m,
                    to_bob: BitMessage::empty(),
                }
            }
        }
        fn alloc(&self, width: usize, _: &[BitMessage], _: &[BitMessage]) -> (ItemSet, ItemSet) {
            (ItemSet::full(width), ItemSet::full(width))
        }
        fn price(&self, _: &[BitMessage], _: &[BitMessage]) -> (Rational, Rational) {
            (ratio(0, 1), ratio(0, 1))
        }
    }

    fn input(m: usize) -> BidderInput {
        BidderInput::new(BxosValuation::new(vec![ItemSet::full(m)]).unwrap())
    }

    #[test]
    fn errors_are_surfaced() {
        let (a, b) = (input(4), input(4));
        let loop_forever = Faulty { stop: false, simultaneous: false };
        assert_eq!(execute(&loop_forever, &a, &b, 5), Err(ProtocolError::RoundBudget(5)));
        assert_eq!(execute(&loop_forever, &a, &b, 0), Err(ProtocolError::ZeroRounds));
        let liar = Faulty { stop: false, simultaneous: true };
        assert_eq!(execute(&liar, &a, &b, 5), Err(ProtocolError::NotSimultaneous));
        let greedy = Faulty { stop: true, simultaneous: true };
        assert_eq!(execute(&greedy, &a, &b, 5), Err(ProtocolError::Overlap));
    }

    #[test]
    fn trivial_outcome_accounting() {
        let half = ItemSet::from_items(16, 0..8).unwrap();
        let a = BidderInput::new(BxosValuation::new(vec![half.clone()]).unwrap());
        let b = BidderInput::new(BxosValuation::new(vec![half.complement()]).unwrap());
        let p = GrandBundle::trivial(16);
        let out = execute(&p, &a, &b, DEFAULT_MAX_ROUNDS).unwrap();
        assert_eq!(out.rounds, 1);
        assert_eq!(out.cc_bits, 10);
        assert_eq!(out.cc_bits, out.transcript_bits());
        assert_eq!(approx_ratio(&out, &a.valuation, &b.valuation).unwrap(), ratio(1, 2));
        assert_eq!(execute(&p, &a, &b, 1).unwrap(), out);
    }

    #[test]
    fn empty_allocation_has_ratio_zero() {
        let a = input(4);
        let out = ProtocolOutcome {
            allocation: Allocation::empty(4),
            prices: (ratio(0, 1), ratio(0, 1)),
            rounds: 1,
            cc_bits: 0,
            alice_to_seller: vec![],
            bob_to_seller: vec![],
            seller_to_alice: vec![],
            seller_to_bob: vec![],
        };
        assert_eq!(approx_ratio(&out, &a.valuation, &a.valuation).unwrap(), ratio(0, 1));
    }
}
