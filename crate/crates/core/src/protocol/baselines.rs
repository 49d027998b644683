use num_bigint::BigInt;
use rand::Rng;

use super::{value_bits, BidderInput, BitMessage, Protocol, ProtocolError, SellerAction};
use crate::construction::{constant_vectors, ConstantVectors};
use crate::setcore::{part_profile, ItemSet, Rational, RngStream};

pub const PROTOCOL_NAMES: [&str; 5] = ["trivial", "basis-exchange", "random-clause", "vickrey", "zero-price"];

pub fn protocol_by_name(
    name: &str,
    m: usize,
    seed: u64,
) -> Result<Box<dyn Protocol + Send + Sync>, ProtocolError> {
    Ok(match name {
        "trivial" => Box::new(GrandBundle::trivial(m)),
        "vickrey" => Box::new(GrandBundle::vickrey(m)),
        "zero-price" => Box::new(GrandBundle::zero_price(m)),
        "random-clause" => Box::new(RandomClause::new(seed)),
        "basis-exchange" => Box::new(
            BasisExchange::new(m).map_err(|e| ProtocolError::Unknown(format!("basis-exchange: {e}")))?,
        ),
        other => return Err(ProtocolError::Unknown(other.to_string())),
    })
}

fn zero() -> Rational {
    Rational::from_integer(BigInt::from(0))
}

/// One-round auction of the whole item set: each bidder reports `v(M)`, the higher
/// report takes everything (ties to Alice).
#[derive(Debug, Clone)]
pub struct GrandBundle {
    name: &'static str,
    bits: usize,
    second_price: bool,
}

impl GrandBundle {
    /// No payments; welfare is the larger grand-bundle value.
    pub fn trivial(m: usize) -> Self {
        GrandBundle {
            name: "trivial",
            bits: value_bits(m),
            second_price: false,
        }
    }

    /// The winner pays the loser's report.
    pub fn vickrey(m: usize) -> Self {
        GrandBundle {
            name: "vickrey",
            bits: value_bits(m),
            second_price: true,
        }
    }

    pub fn zero_price(m: usize) -> Self {
        GrandBundle {
            name: "zero-price",
            ..GrandBundle::trivial(m)
        }
    }

    fn report(&self, input: &BidderInput) -> BitMessage {
        let mut msg = BitMessage::empty();
        msg.push_uint(input.valuation.grand_value() as u64, self.bits);
        msg
    }

    fn bids(&self, a: &[BitMessage], b: &[BitMessage]) -> (u64, u64) {
        (a[0].read_uint(0, self.bits), b[0].read_uint(0, self.bits))
    }
}

impl Protocol for GrandBundle {
    fn name(&self) -> &str {
        self.name
    }

    fn is_simultaneous(&self) -> bool {
        true
    }

    fn alice(&self, input: &BidderInput, _: &[BitMessage]) -> BitMessage {
        self.report(input)
    }

    fn bob(&self, input: &BidderInput, _: &[BitMessage]) -> BitMessage {
        self.report(input)
    }

    fn seller(&self, _: &[BitMessage], _: &[BitMessage]) -> SellerAction {
        SellerAction::Terminate
    }

    fn alloc(&self, width: usize, a: &[BitMessage], b: &[BitMessage]) -> (ItemSet, ItemSet) {
        let (ba, bb) = self.bids(a, b);
        if ba >= bb {
            (ItemSet::full(width), ItemSet::empty(width))
        } else {
            (ItemSet::empty(width), ItemSet::full(width))
        }
    }

    fn price(&self, a: &[BitMessage], b: &[BitMessage]) -> (Rational, Rational) {
        if !self.second_price {
            return (zero(), zero());
        }
        let (ba, bb) = self.bids(a, b);
        let int = |x: u64| Rational::from_integer(BigInt::from(x));
        if ba >= bb {
            (int(bb), zero())
        } else {
            (zero(), int(ba))
        }
    }
}

/// Alice sends one of her clauses chosen by the seed; she receives it and Bob the rest.
#[derive(Debug, Clone)]
pub struct RandomClause {
    seed: u64,
}

impl RandomClause {
    pub fn new(seed: u64) -> Self {
        RandomClause { seed }
    }
}

impl Protocol for RandomClause {
    fn name(&self) -> &str {
        "random-clause"
    }

    fn is_simultaneous(&self) -> bool {
        true
    }

    fn alice(&self, input: &BidderInput, _: &[BitMessage]) -> BitMessage {
        let clauses = input.valuation.clauses();
        let i = RngStream::new(self.seed, 0).random_range(0..clauses.len());
        BitMessage::from_set(&clauses[i])
    }

    fn bob(&self, _: &BidderInput, _: &[BitMessage]) -> BitMessage {
        BitMessage::empty()
    }

    fn seller(&self, _: &[BitMessage], _: &[BitMessage]) -> SellerAction {
        SellerAction::Terminate
    }

    fn alloc(&self, width: usize, a: &[BitMessage], _: &[BitMessage]) -> (ItemSet, ItemSet) {
        let c = a[0].read_set(0, width);
        let rest = c.complement();
        (c, rest)
    }

    fn price(&self, _: &[BitMessage], _: &[BitMessage]) -> (Rational, Rational) {
        (zero(), zero())
    }
}

/// Two rounds. Bob sends his basis `T`, which the seller forwards to Alice; Alice
/// then sends her clause whose profile over `S ‖ T` is a special one, and receives
/// it while Bob receives the rest.
#[derive(Debug, Clone)]
pub struct BasisExchange {
    cv: ConstantVectors,
}

impl BasisExchange {
    pub fn new(m: usize) -> Result<Self, crate::construction::ConstructionError> {
        Ok(BasisExchange {
            cv: constant_vectors(m)?,
        })
    }

    fn m(&self) -> usize {
        self.cv.m
    }
}

impl Protocol for BasisExchange {
    fn name(&self) -> &str {
        "basis-exchange"
    }

    fn is_simultaneous(&self) -> bool {
        false
    }

    fn alice(&self, input: &BidderInput, from_seller: &[BitMessage]) -> BitMessage {
        let m = self.m();
        let (Some(relay), Some(s)) = (from_seller.first(), input.basis.as_ref()) else {
            return BitMessage::empty();
        };
        if relay.len() != 2 * m || input.valuation.width() != m {
            return BitMessage::empty();
        }
        let st = [s.s1.clone(), s.s2.clone(), relay.read_set(0, m), relay.read_set(m, m)];
        input
            .valuation
            .clauses()
            .iter()
            .find(|c| {
                let prof = part_profile(&st, m, Some(c)).expect("same width");
                prof == self.cv.spec1 || prof == self.cv.spec2
            })
            .map(BitMessage::from_set)
            .unwrap_or_default()
    }

    fn bob(&self, input: &BidderInput, from_seller: &[BitMessage]) -> BitMessage {
        match (&input.basis, from_seller.is_empty()) {
            (Some(t), true) => {
                let mut msg = BitMessage::from_set(&t.s1);
                msg.push_set(&t.s2);
                msg
            }
            _ => BitMessage::empty(),
        }
    }

    fn seller(&self, a: &[BitMessage], b: &[BitMessage]) -> SellerAction {
        if a.len() == 1 {
            SellerAction::Reply {
                to_alice: b[0].clone(),
                to_bob: BitMessage::empty(),
            }
        } else {
            SellerAction::Terminate
        }
    }

    fn alloc(&self, width: usize, a: &[BitMessage], _: &[BitMessage]) -> (ItemSet, ItemSet) {
        match a.get(1) {
            Some(msg) if msg.len() == width => {
                let c = msg.read_set(0, width);
                let rest = c.complement();
                (c, rest)
            }
            _ => (ItemSet::empty(width), ItemSet::full(width)),
        }
    }

    fn price(&self, _: &[BitMessage], _: &[BitMessage]) -> (Rational, Rational) {
        (zero(), zero())
    }
}
