use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::TAU;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BidError {
    #[error("bid {index} is negative ({value})")]
    Negative { index: usize, value: f64 },
    #[error("bid {index} is not finite")]
    NotFinite { index: usize },
}

/// Non-negative and finite, or the first offending index.
pub fn check_bids(values: &[f64]) -> Result<(), BidError> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(BidError::NotFinite { index });
        }
        if value < 0.0 {
            return Err(BidError::Negative { index, value });
        }
    }
    Ok(())
}

/// One non-negative, finite bid per identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BidVector(Vec<f64>);

impl BidVector {
    pub fn new(bids: Vec<f64>) -> Result<Self, BidError> {
        check_bids(&bids)?;
        Ok(BidVector(bids))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Copy of the vector with identity `i`'s bid replaced.
    pub fn with_bid(&self, i: usize, bid: f64) -> Result<Self, BidError> {
        let mut v = self.0.clone();
        v[i] = bid;
        BidVector::new(v)
    }
}

impl Deref for BidVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for BidVector {
    type Error = BidError;
    fn try_from(v: Vec<f64>) -> Result<Self, BidError> {
        BidVector::new(v)
    }
}

impl From<BidVector> for Vec<f64> {
    fn from(b: BidVector) -> Vec<f64> {
        b.0
    }
}

/// True valuations, one per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ValuationProfile(Vec<f64>);

impl ValuationProfile {
    pub fn new(values: Vec<f64>) -> Result<Self, BidError> {
        check_bids(&values)?;
        Ok(ValuationProfile(values))
    }

    /// Truthful single-identity reports.
    pub fn as_bids(&self) -> BidVector {
        BidVector(self.0.clone())
    }
}

impl Deref for ValuationProfile {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ValuationProfile {
    type Error = BidError;
    fn try_from(v: Vec<f64>) -> Result<Self, BidError> {
        ValuationProfile::new(v)
    }
}

impl From<ValuationProfile> for Vec<f64> {
    fn from(v: ValuationProfile) -> Vec<f64> {
        v.0
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OutcomeViolation {
    #[error("outcome has {payments} payments for {bids} bids")]
    LengthMismatch { payments: usize, bids: usize },
    #[error("identity {0} receives a positive transfer")]
    PositiveTransfer(usize),
    #[error("losing identity {0} is charged")]
    LoserCharged(usize),
    #[error("identity {index} pays {payment} above its bid {bid}")]
    AboveBid {
        index: usize,
        payment: f64,
        bid: f64,
    },
    #[error("winner index {0} out of range")]
    BadWinner(usize),
}

/// Identity-level result of a mechanism: who is served and who pays what.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// Served identities, ascending.
    pub winners: Vec<usize>,
    pub payments: Vec<f64>,
}

impl Outcome {
    /// Nobody served, nobody charged.
    pub fn empty(n: usize) -> Self {
        Outcome {
            winners: Vec::new(),
            payments: vec![0.0; n],
        }
    }

    pub fn from_parts(mut winners: Vec<usize>, payments: Vec<f64>) -> Self {
        winners.sort_unstable();
        winners.dedup();
        Outcome { winners, payments }
    }

    pub fn is_winner(&self, i: usize) -> bool {
        self.winners.binary_search(&i).is_ok()
    }

    pub fn served_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.payments.len()];
        for &w in &self.winners {
            mask[w] = true;
        }
        mask
    }

    pub fn total_payment(&self) -> f64 {
        self.payments.iter().sum()
    }

    /// NPT, IR and zero charge for losers, each up to [`TAU`].
    pub fn check_invariants(&self, bids: &[f64]) -> Result<(), OutcomeViolation> {
        if self.payments.len() != bids.len() {
            return Err(OutcomeViolation::LengthMismatch {
                payments: self.payments.len(),
                bids: bids.len(),
            });
        }
        if let Some(&w) = self.winners.iter().find(|&&w| w >= bids.len()) {
            return Err(OutcomeViolation::BadWinner(w));
        }
        for (index, (&payment, &bid)) in self.payments.iter().zip(bids).enumerate() {
            if payment < -TAU {
                return Err(OutcomeViolation::PositiveTransfer(index));
            }
            if self.is_winner(index) {
                if payment > bid + TAU {
                    return Err(OutcomeViolation::AboveBid {
                        index,
                        payment,
                        bid,
                    });
                }
            } else if payment.abs() > TAU {
                return Err(OutcomeViolation::LoserCharged(index));
            }
        }
        Ok(())
    }
}
