// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use cellprobe::enumerate::Cube;
use cellprobe::samplers::{random_forest, ForestGenSpec};
use cellprobe::{DecisionForest, Symbol};
use proptest::prelude::*;

/// Small random forests, enumerable in well under a second.
pub fn small_forest() -> impl Strategy<Value = DecisionForest> {
    (any::<u64>(), 1usize..=5, 2u32..=3, 1usize..=4, 2u32..=3, 0usize..=3, any::<bool>(), 0.0f64..0.5).prop_map(
        |(seed, s, lambda, m, sigma, depth, bot, stop)| {
            random_forest(&ForestGenSpec {
                s,
                lambda,
                m,
                sigma,
                depth,
                bot_prob: if bot { 0.25 } else { 0.0 },
                stop_prob: stop,
                seed,
                ..Default::default()
            })
            .unwrap()
        },
    )
}

/// Every input of the forest's cube, in enumeration order.
pub fn all_inputs(s: usize, lambda: Symbol) -> Vec<Vec<Symbol>> {
    let cube = Cube::new(s, lambda, (0..s).collect(), 1 << 20).unwrap();
    let mut out = Vec::with_capacity(cube.size() as usize);
    cube.for_each(|x| out.push(x.to_vec()));
    out
}
