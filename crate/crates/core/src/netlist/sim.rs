//! Functional (zero-delay) simulation.
//!
//! Clocking is ignored: DFF, BUF and SPLITTER forward their input and a
//! MERGER behaves as OR.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{GateKind, NetlistError, Network};

/// Networks with at most this many inputs are compared exhaustively.
pub const EXHAUSTIVE_INPUT_LIMIT: usize = 16;
/// Number of random vectors used above [`EXHAUSTIVE_INPUT_LIMIT`].
pub const RANDOM_VECTORS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("expected {expected} input bits, got {got}")]
    MissingInput { expected: usize, got: usize },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// Simulates 64 input vectors at once. `inputs[i]` holds the bits of the
/// i-th primary input; the result holds one word per primary output.
pub fn simulate_packed(net: &Network, inputs: &[u64]) -> Result<Vec<u64>, SimError> {
    let pis = net.primary_inputs();
    if inputs.len() != pis.len() {
        return Err(SimError::MissingInput {
            expected: pis.len(),
            got: inputs.len(),
        });
    }
    let order = net.topological_order()?;
    let mut value = vec![0u64; net.len()];
    for (&pi, &w) in pis.iter().zip(inputs) {
        value[pi] = w;
    }
    for v in order {
        let node = net.node(v);
        let f = &node.fanins;
        value[v] = match node.kind {
            GateKind::Pi => value[v],
            GateKind::Po | GateKind::Buf | GateKind::Dff | GateKind::Splitter => value[f[0]],
            GateKind::Not => !value[f[0]],
            GateKind::And => value[f[0]] & value[f[1]],
            GateKind::Or | GateKind::Merger => value[f[0]] | value[f[1]],
            GateKind::Xor => value[f[0]] ^ value[f[1]],
        };
    }
    Ok(net.primary_outputs().iter().map(|&o| value[o]).collect())
}

/// Evaluates one input vector (ordered like [`Network::primary_inputs`]).
pub fn simulate(net: &Network, inputs: &[bool]) -> Result<Vec<bool>, SimError> {
    let words: Vec<u64> = inputs.iter().map(|&b| if b { !0 } else { 0 }).collect();
    Ok(simulate_packed(net, &words)?
        .into_iter()
        .map(|w| w & 1 == 1)
        .collect())
}

/// Compares two networks on the same input/output ordering: exhaustively up
/// to [`EXHAUSTIVE_INPUT_LIMIT`] inputs, otherwise on [`RANDOM_VECTORS`]
/// seeded random vectors.
pub fn equivalent(a: &Network, b: &Network, seed: u64) -> Result<bool, SimError> {
    let k = a.primary_inputs().len();
    if k != b.primary_inputs().len() || a.primary_outputs().len() != b.primary_outputs().len() {
        return Ok(false);
    }
    let batches: Vec<Vec<u64>> = if k <= EXHAUSTIVE_INPUT_LIMIT {
        let total = 1usize << k;
        (0..total.div_ceil(64))
            .map(|w| {
                (0..k)
                    .map(|i| {
                        (0..64).fold(0u64, |acc, bit| {
                            let v = w * 64 + bit;
                            if v < total && (v >> i) & 1 == 1 {
                                acc | (1 << bit)
                            } else {
                                acc
                            }
                        })
                    })
                    .collect()
            })
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..RANDOM_VECTORS.div_ceil(64))
            .map(|_| (0..k).map(|_| rng.gen::<u64>()).collect())
            .collect()
    };
    for words in batches {
        if simulate_packed(a, &words)? != simulate_packed(b, &words)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(kind: GateKind, arity: usize) -> Network {
        let mut net = Network::new("g");
        let ins: Vec<_> = (0..arity).map(|i| net.add_input(format!("i{i}"))).collect();
        let g = net.add_gate(kind, &ins);
        net.add_output(g, "y");
        net
    }

    #[test]
    fn xor_one_one() {
        assert_eq!(simulate(&single(GateKind::Xor, 2), &[true, true]).unwrap(), vec![false]);
    }

    #[test]
    fn merger_is_or() {
        let net = single(GateKind::Merger, 2);
        assert_eq!(simulate(&net, &[false, true]).unwrap(), vec![true]);
        assert_eq!(simulate(&net, &[false, false]).unwrap(), vec![false]);
    }

    #[test]
    fn dff_is_identity() {
        let net = single(GateKind::Dff, 1);
        for x in [false, true] {
            assert_eq!(simulate(&net, &[x]).unwrap(), vec![x]);
        }
    }

    #[test]
    fn missing_bit_is_an_error() {
        let net = single(GateKind::And, 2);
        assert_eq!(
            simulate(&net, &[true]),
            Err(SimError::MissingInput { expected: 2, got: 1 })
        );
    }

    #[test]
    fn equivalence_detects_difference() {
        let and = single(GateKind::And, 2);
        let or = single(GateKind::Or, 2);
        let merger = single(GateKind::Merger, 2);
        assert!(!equivalent(&and, &or, 1).unwrap());
        assert!(equivalent(&or, &merger, 1).unwrap());
    }

    #[test]
    fn packed_matches_scalar() {
        let net = single(GateKind::And, 2);
        let out = simulate_packed(&net, &[0b1100, 0b1010]).unwrap();
        assert_eq!(out[0] & 0b1111, 0b1000);
    }
}
