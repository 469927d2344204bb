//! Shared test support: a straight-line reference evaluator and random chips.
#![allow(dead_code)]

use std::path::PathBuf;

use fuzzchip::rulelang::{Direction, SignalDecl};
use fuzzchip::{ChipObject, ChipType, CompiledRule, CompiledRuleSet, MembershipFunction, Universe};
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// A chip described with plain arrays, independent of the library types.
#[derive(Debug, Clone)]
pub struct RawChip {
    pub inputs: Vec<(f64, f64)>,
    pub outputs: Vec<(f64, f64)>,
    /// (antecedent per input, consequent per output)
    pub rules: Vec<(Vec<[u8; 16]>, Vec<[u8; 16]>)>,
}

pub struct OracleResult<A, B> {
    pub alphas: Vec<A>,
    pub memberships: Vec<[B; 16]>,
    pub crisp: Vec<Option<f64>>,
}

/// Midpoint of bin k, written as (2k + 1) / 32 of the width.
fn oracle_center(lo: f64, hi: f64, k: usize) -> f64 {
    lo + (2 * k + 1) as f64 * (hi - lo) / 32.0
}

fn oracle_centroid(b: &[f64; 16], lo: f64, hi: f64) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..16 {
        num += b[k] * oracle_center(lo, hi, k);
        den += b[k];
    }
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

/// Max-min inference with explicit loops.
pub fn oracle_minmax(chip: &RawChip, levels: &[u8]) -> OracleResult<u8, u8> {
    let mut alphas = Vec::new();
    for (ante, _) in &chip.rules {
        let mut alpha = 15u8;
        for j in 0..levels.len() {
            let truth = ante[j][levels[j] as usize];
            if truth < alpha {
                alpha = truth;
            }
        }
        alphas.push(alpha);
    }
    let mut memberships = Vec::new();
    let mut crisp = Vec::new();
    for (o, &(lo, hi)) in chip.outputs.iter().enumerate() {
        let mut b = [0u8; 16];
        for k in 0..16 {
            let mut best = 0u8;
            for (i, (_, cons)) in chip.rules.iter().enumerate() {
                let clipped = if alphas[i] < cons[o][k] { alphas[i] } else { cons[o][k] };
                if clipped > best {
                    best = clipped;
                }
            }
            b[k] = best;
        }
        let mut bf = [0.0; 16];
        for k in 0..16 {
            bf[k] = b[k] as f64;
        }
        crisp.push(oracle_centroid(&bf, lo, hi));
        memberships.push(b);
    }
    OracleResult { alphas, memberships, crisp }
}

/// Max-product inference with explicit loops.
pub fn oracle_product(chip: &RawChip, levels: &[u8]) -> OracleResult<f64, f64> {
    let mut alphas = Vec::new();
    for (ante, _) in &chip.rules {
        let mut alpha = 15u8;
        for j in 0..levels.len() {
            alpha = alpha.min(ante[j][levels[j] as usize]);
        }
        alphas.push(alpha as f64 / 15.0);
    }
    let mut memberships = Vec::new();
    let mut crisp = Vec::new();
    for (o, &(lo, hi)) in chip.outputs.iter().enumerate() {
        let mut b = [0.0f64; 16];
        for k in 0..16 {
            for (i, (_, cons)) in chip.rules.iter().enumerate() {
                let v = alphas[i] * (cons[o][k] as f64 / 15.0);
                if v > b[k] {
                    b[k] = v;
                }
            }
        }
        crisp.push(oracle_centroid(&b, lo, hi));
        memberships.push(b);
    }
    OracleResult { alphas, memberships, crisp }
}

pub fn random_mf<R: Rng>(rng: &mut R) -> [u8; 16] {
    match rng.gen_range(0..10) {
        0 => [15; 16],
        1 => [0; 16],
        2..=4 => {
            let c = rng.gen_range(0..16i32);
            let w = rng.gen_range(1..9) as f64;
            std::array::from_fn(|i| (15.0 * (1.0 - (i as i32 - c).abs() as f64 / w).max(0.0)).round() as u8)
        }
        _ => std::array::from_fn(|_| rng.gen_range(0..16)),
    }
}

pub fn random_universe<R: Rng>(rng: &mut R) -> (f64, f64) {
    let lo = rng.gen_range(-500.0..500.0);
    (lo, lo + rng.gen_range(0.01..1000.0))
}

pub fn random_raw<R: Rng>(rng: &mut R, inputs: usize, outputs: usize, rules: usize) -> RawChip {
    RawChip {
        inputs: (0..inputs).map(|_| random_universe(rng)).collect(),
        outputs: (0..outputs).map(|_| random_universe(rng)).collect(),
        rules: (0..rules)
            .map(|_| {
                (
                    (0..inputs).map(|_| random_mf(rng)).collect(),
                    (0..outputs).map(|_| random_mf(rng)).collect(),
                )
            })
            .collect(),
    }
}

pub fn to_chip(raw: &RawChip, name: &str, kind: ChipType) -> ChipObject {
    let decl = |prefix: &str, i: usize, (lo, hi): (f64, f64), direction| SignalDecl {
        name: format!("{prefix}{i}"),
        universe: Universe::new(lo, hi).unwrap(),
        direction,
        position: i,
    };
    let compiled = CompiledRuleSet::new(
        raw.inputs.iter().enumerate().map(|(i, &u)| decl("X", i, u, Direction::Input)).collect(),
        raw.outputs.iter().enumerate().map(|(i, &u)| decl("Y", i, u, Direction::Output)).collect(),
        raw.rules
            .iter()
            .map(|(a, c)| CompiledRule {
                antecedent: a.iter().map(|m| MembershipFunction::new(*m).unwrap()).collect(),
                consequent: c.iter().map(|m| MembershipFunction::new(*m).unwrap()).collect(),
            })
            .collect(),
    )
    .unwrap();
    ChipObject::new(name, kind, compiled).unwrap()
}

/// Every level vector for `n` inputs, input 0 varying fastest.
pub fn all_states(n: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1u32 << (4 * n)).map(move |a| (0..n).map(|k| ((a >> (4 * k)) & 0xF) as u8).collect())
}
