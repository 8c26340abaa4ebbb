//! False-name extension of an anonymous mechanism.
//!
//! Each agent reports a finite list of identity bids. The lists are
//! concatenated into one identity-level bid vector, the base mechanism runs on
//! it, and the result is folded back: an agent is served if any of its
//! identities is served, and pays the sum over its identities.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::mechanisms::{Mechanism, MechanismError};
use crate::types::{BidError, BidVector, Outcome};

/// Per-agent identity bids. An empty list abstains and is treated as a
/// single zero bid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SybilProfile {
    per_agent: Vec<Vec<f64>>,
}

impl SybilProfile {
    pub fn new(per_agent: Vec<Vec<f64>>) -> Result<Self, BidError> {
        for list in &per_agent {
            BidVector::new(list.clone())?;
        }
        let per_agent = per_agent
            .into_iter()
            .map(|l| if l.is_empty() { vec![0.0] } else { l })
            .collect();
        Ok(SybilProfile { per_agent })
    }

    /// One identity per agent.
    pub fn truthful(bids: &[f64]) -> Result<Self, BidError> {
        SybilProfile::new(bids.iter().map(|&b| vec![b]).collect())
    }

    pub fn agents(&self) -> usize {
        self.per_agent.len()
    }

    pub fn agent(&self, i: usize) -> &[f64] {
        &self.per_agent[i]
    }

    pub fn per_agent(&self) -> &[Vec<f64>] {
        &self.per_agent
    }

    /// Copy of the profile with agent `i`'s list replaced.
    pub fn with_agent(&self, i: usize, bids: Vec<f64>) -> Result<Self, BidError> {
        let mut per_agent = self.per_agent.clone();
        per_agent[i] = bids;
        SybilProfile::new(per_agent)
    }
}

impl TryFrom<Vec<Vec<f64>>> for SybilProfile {
    type Error = BidError;
    fn try_from(v: Vec<Vec<f64>>) -> Result<Self, BidError> {
        SybilProfile::new(v)
    }
}

impl From<SybilProfile> for Vec<Vec<f64>> {
    fn from(p: SybilProfile) -> Self {
        p.per_agent
    }
}

/// Which agent owns each identity. Identities of one agent are contiguous.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OwnerMap {
    pub owner: Vec<usize>,
    blocks: Vec<Range<usize>>,
}

impl OwnerMap {
    pub fn identities(&self, agent: usize) -> Range<usize> {
        self.blocks[agent].clone()
    }

    pub fn agents(&self) -> usize {
        self.blocks.len()
    }

    pub fn total_identities(&self) -> usize {
        self.owner.len()
    }
}

/// Concatenates the per-agent lists in agent order.
pub fn flatten(profile: &SybilProfile) -> (BidVector, OwnerMap) {
    let total = profile.per_agent.iter().map(Vec::len).sum();
    let mut bids = Vec::with_capacity(total);
    let mut owner = Vec::with_capacity(total);
    let mut blocks = Vec::with_capacity(profile.agents());
    for (agent, list) in profile.per_agent.iter().enumerate() {
        let start = bids.len();
        bids.extend_from_slice(list);
        owner.extend(std::iter::repeat_n(agent, list.len()));
        blocks.push(start..bids.len());
    }
    // Every list was validated on construction.
    let bids = BidVector::new(bids).expect("validated profile");
    (bids, OwnerMap { owner, blocks })
}

/// Agent-level view of an identity-level outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SybilOutcome {
    pub served: Vec<bool>,
    pub total_payment: Vec<f64>,
    pub identity: Outcome,
    pub owners: OwnerMap,
}

impl SybilOutcome {
    pub fn aggregate(identity: Outcome, owners: OwnerMap) -> Self {
        let mut served = vec![false; owners.agents()];
        let mut total_payment = vec![0.0; owners.agents()];
        for (k, &agent) in owners.owner.iter().enumerate() {
            total_payment[agent] += identity.payments[k];
        }
        for &w in &identity.winners {
            served[owners.owner[w]] = true;
        }
        SybilOutcome {
            served,
            total_payment,
            identity,
            owners,
        }
    }

    /// Served agents, ascending.
    pub fn served_agents(&self) -> Vec<usize> {
        (0..self.served.len()).filter(|&i| self.served[i]).collect()
    }
}

pub fn run_sybil_extension(
    mechanism: &dyn Mechanism,
    profile: &SybilProfile,
) -> Result<SybilOutcome, MechanismError> {
    let (bids, owners) = flatten(profile);
    let out = mechanism.run(&bids)?;
    Ok(SybilOutcome::aggregate(out, owners))
}

/// Quasi-linear utility; extra served identities add nothing.
pub fn agent_utility(value: f64, out: &SybilOutcome, agent: usize) -> f64 {
    let gain = if out.served[agent] { value } else { 0.0 };
    gain - out.total_payment[agent]
}
