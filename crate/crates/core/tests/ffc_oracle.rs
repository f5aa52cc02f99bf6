//! FFC blocks against a full complex-DFT evaluation, plus linearity,
//! determinism and file round trips.

mod common;

use common::*;
use freqtc::ffc::{
    decode_tensor, decode_weights, encode_tensor, encode_weights, ffc_forward, spectral_transform, BlockKind,
    BlockSpec, FeatureTensor, FfcNetwork, FfcWeights, RawTensor, SpectralTransformWeights,
};
use freqtc::Error;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn spectral_transform_matches_complex_dft_oracle() {
    let mut r = rng(40);
    let cases = [
        (2, 4, 4),
        (2, 4, 5),
        (3, 5, 7),
        (1, 6, 6),
        (2, 1, 9),
        (2, 7, 1),
        (3, 8, 11),
    ];
    for (c, h, w) in cases {
        for activation in [false, true] {
            let x = random_tensor(&mut r, c, h, w);
            let weights = random_spectral_weights(&mut r, c, 3, activation);
            let fast = spectral_transform(&x, &weights).unwrap();
            let oracle = oracle_spectral_transform(&x, &weights);
            let err = fast.max_abs_diff(&oracle);
            assert!(err <= 1e-8, "{c}×{h}×{w}: {err}");
        }
    }
}

#[test]
fn identity_spectral_transform_is_identity() {
    let mut r = rng(41);
    for (c, h, w) in [(2, 4, 4), (3, 5, 7), (1, 16, 9)] {
        let x = random_tensor(&mut r, c, h, w);
        let y = spectral_transform(&x, &SpectralTransformWeights::identity(c)).unwrap();
        assert!(x.max_abs_diff(&y) <= 1e-8);
    }
}

#[test]
fn zero_input_zero_bias_gives_zero_output() {
    let mut r = rng(42);
    let mut spec = BlockSpec::same(8, 0.5);
    spec.activation = true;
    let w = random_weights(&mut r, spec, 4, false);
    let y = ffc_forward(&FeatureTensor::zeros(8, 16, 16), &w).unwrap();
    assert_eq!(y.shape(), (8, 16, 16));
    assert!(y.data().iter().all(|&v| v == 0.0));
}

#[test]
fn block_matches_direct_two_stream_sum() {
    let mut r = rng(43);
    let spec = BlockSpec::same(5, 0.4);
    let w = random_weights(&mut r, spec, 3, true);
    let x = random_tensor(&mut r, 5, 6, 7);
    let y = ffc_forward(&x, &w).unwrap();
    let (xl, xg) = freqtc::ffc::split_channels(&x, 0.4).unwrap();
    let yl = w
        .l2l
        .as_ref()
        .unwrap()
        .forward(&xl, 1)
        .unwrap()
        .add(&w.g2l.as_ref().unwrap().forward(&xg, 1).unwrap())
        .unwrap();
    let yg = oracle_spectral_transform(&xg, w.g2g.as_ref().unwrap())
        .add(&w.l2g.as_ref().unwrap().forward(&xl, 1).unwrap())
        .unwrap();
    let expected = freqtc::ffc::concat_channels(&[&yl, &yg]).unwrap();
    assert!(y.max_abs_diff(&expected) <= 1e-8);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let mut r = rng(44);
    let mut spec = BlockSpec::same(8, 0.5);
    spec.norm = true;
    spec.activation = true;
    let w = random_weights(&mut r, spec, 4, true);
    let x = random_tensor(&mut r, 8, 16, 16);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ffc_forward(&x, &w).unwrap())
    };
    let (a, b, c) = (run(1), run(1), run(4));
    assert_eq!(a, b);
    assert!(a.max_abs_diff(&c) <= 1e-12);
}

#[test]
fn down_and_up_blocks_follow_strided_and_upsampled_shapes() {
    let mut r = rng(45);
    let mut down = BlockSpec::same(4, 0.5);
    down.kind = BlockKind::Down;
    let mut up = BlockSpec::same(4, 0.5);
    up.kind = BlockKind::Up;
    let mut res = BlockSpec::same(4, 0.5);
    res.residual = true;
    let net = FfcNetwork::new(vec![
        random_weights(&mut r, down, 2, true),
        random_weights(&mut r, res, 2, true),
        random_weights(&mut r, up, 2, true),
    ])
    .unwrap();
    let (y, trace) = net.forward(&random_tensor(&mut r, 4, 16, 12)).unwrap();
    assert_eq!(trace, vec![(4, 8, 6), (4, 8, 6), (4, 16, 12)]);
    assert_eq!(y.shape(), (4, 16, 12));
}

#[test]
fn corrupted_magic_reports_offset_zero() {
    let t = RawTensor {
        dims: vec![1, 2, 2],
        values: vec![0.0; 4],
    };
    let mut bytes = encode_tensor(&t);
    bytes[2] = b'?';
    assert!(matches!(decode_tensor(&bytes), Err(Error::Format { offset: 0, .. })));
    let net = FfcNetwork::new(vec![FfcWeights::identity(4, 0.5).unwrap()]).unwrap();
    let mut bytes = encode_weights(&net);
    bytes[0] = b'f';
    assert!(matches!(decode_weights(&bytes), Err(Error::Format { offset: 0, .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn linear_without_nonlinearities(seed in any::<u64>(), c in 1usize..7, h in 1usize..9, w in 1usize..9, ratio in prop::sample::select(vec![0.0, 0.25, 0.5, 0.75, 1.0]), a in -3.0f64..3.0) {
        let mut r = rng(seed);
        let w8 = random_weights(&mut r, BlockSpec::same(c, ratio), 2, false);
        let x = random_tensor(&mut r, c, h, w);
        let lhs = ffc_forward(&x.scaled(a), &w8).unwrap();
        let rhs = ffc_forward(&x, &w8).unwrap().scaled(a);
        let scale = rhs.data().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-7 * scale);
    }

    #[test]
    fn shape_is_preserved(seed in any::<u64>(), c in 1usize..6, h in 1usize..10, w in 1usize..10, ratio in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let w8 = random_weights(&mut r, BlockSpec::same(c, ratio), 2, true);
        let y = ffc_forward(&random_tensor(&mut r, c, h, w), &w8).unwrap();
        prop_assert_eq!(y.shape(), (c, h, w));
    }

    #[test]
    fn weight_file_round_trip(seed in any::<u64>(), c in 1usize..6, ratio in 0.0f64..=1.0, norm in any::<bool>(), act in any::<bool>()) {
        let mut r = rng(seed);
        let mut spec = BlockSpec::same(c, ratio as f32 as f64);
        spec.norm = norm;
        spec.activation = act;
        let mut block = random_weights(&mut r, spec, 3, true);
        // values are stored as f32
        let round = |v: &mut f64| *v = *v as f32 as f64;
        if let Some(k) = &mut block.l2l { k.weight.iter_mut().for_each(round); k.bias.iter_mut().for_each(round); }
        if let Some(k) = &mut block.g2l { k.weight.iter_mut().for_each(round); k.bias.iter_mut().for_each(round); }
        if let Some(k) = &mut block.l2g { k.weight.iter_mut().for_each(round); k.bias.iter_mut().for_each(round); }
        if let Some(st) = &mut block.g2g {
            for k in [&mut st.pre, &mut st.freq, &mut st.post] {
                k.weight.iter_mut().for_each(round);
                k.bias.iter_mut().for_each(round);
            }
            for n in [&mut st.pre_norm, &mut st.freq_norm].into_iter().flatten() {
                n.scale.iter_mut().for_each(round);
                n.shift.iter_mut().for_each(round);
            }
        }
        for n in [&mut block.norm_l, &mut block.norm_g].into_iter().flatten() {
            n.scale.iter_mut().for_each(round);
            n.shift.iter_mut().for_each(round);
        }
        let net = FfcNetwork::new(vec![block]).unwrap();
        let bytes = encode_weights(&net);
        prop_assert_eq!(decode_weights(&bytes).unwrap(), net);
    }

    #[test]
    fn tensor_file_round_trip(seed in any::<u64>(), c in 1usize..5, h in 1usize..7, w in 1usize..7) {
        let mut r = rng(seed);
        let t = RawTensor { dims: vec![c, h, w], values: (0..c * h * w).map(|_| r.random::<f32>() - 0.5).collect() };
        let bytes = encode_tensor(&t);
        prop_assert_eq!(bytes.len(), 8 + 12 + 4 * c * h * w);
        prop_assert_eq!(decode_tensor(&bytes).unwrap(), t.clone());
        let ft = FeatureTensor::try_from(&t).unwrap();
        prop_assert_eq!(RawTensor::from(&ft), t);
    }
}
