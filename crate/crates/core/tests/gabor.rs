mod common;

use lghp::config::{Binning, LghpParams};
use lghp::gabor::{
    build_bank, build_gabor_descriptor, convolve_complex, default_bank, gabor_kernel,
    GaborOrientation, GaborSpec,
};
use lghp::histogram::build_descriptor;
use lghp::image::GrayImage;

fn oracle_taps(spec: &GaborSpec, half: usize) -> Vec<(f64, f64)> {
    let h = half as i64;
    let mut taps = Vec::new();
    for t in -h..=h {
        for s in -h..=h {
            taps.push(common::gabor_tap(
                spec.frequency,
                spec.sigma_s,
                spec.sigma_t,
                spec.orientation.degrees() as f64,
                s as f64,
                t as f64,
            ));
        }
    }
    taps
}

#[test]
fn kernel_matches_closed_form() {
    let spec = GaborSpec {
        frequency: 0.25,
        sigma_s: 2.0,
        sigma_t: 2.0,
        orientation: GaborOrientation::Deg0,
    };
    let k = gabor_kernel(spec).unwrap();
    assert_eq!(k.side(), 13);
    for (tap, (re, im)) in k.taps.iter().zip(oracle_taps(&spec, k.half)) {
        assert!((tap.re - re).abs() < 1e-14 && (tap.im - im).abs() < 1e-14);
    }
}

#[test]
fn every_default_kernel_matches_closed_form() {
    for spec in default_bank() {
        let k = gabor_kernel(spec).unwrap();
        for (tap, (re, im)) in k.taps.iter().zip(oracle_taps(&spec, k.half)) {
            assert!((tap.re - re).abs() < 1e-12 && (tap.im - im).abs() < 1e-12);
        }
    }
}

#[test]
fn separable_convolution_matches_naive_loop() {
    let img = common::random_image(16, 16, 255, 21);
    let mut bank = default_bank();
    bank.push(GaborSpec {
        frequency: 0.2,
        sigma_s: 1.5,
        sigma_t: 2.5,
        orientation: GaborOrientation::Deg90,
    });
    for spec in bank {
        let k = gabor_kernel(spec).unwrap();
        let fast = convolve_complex(&img, &k);
        let slow = common::convolve(&img, &oracle_taps(&spec, k.half), k.half);
        let scale = slow
            .iter()
            .map(|(re, im)| re.hypot(*im))
            .fold(0.0, f64::max);
        for (a, (re, im)) in fast.iter().zip(&slow) {
            let err = (a.re - re).hypot(a.im - im);
            assert!(err <= 1e-9 * scale, "{spec:?}: {err} vs scale {scale}");
        }
    }
}

#[test]
fn channel_blocks_follow_bank_order() {
    let img = common::random_image(32, 32, 255, 8);
    let params = LghpParams {
        radius_limit: 2,
        side: 32,
        binning: Binning::U2,
        grid: 1,
    };
    let specs = default_bank();
    let bank = build_bank(&specs).unwrap();
    let forward = build_gabor_descriptor(&img, &params, &bank).unwrap();
    assert_eq!(forward.len(), 4 * 12 * 75);
    assert_eq!(forward.config.channels(), 4);

    let order = [2usize, 0, 3, 1];
    let permuted: Vec<_> = order.iter().map(|&i| bank[i].clone()).collect();
    let shuffled = build_gabor_descriptor(&img, &params, &permuted).unwrap();
    let block = 12 * 75;
    for (k, &i) in order.iter().enumerate() {
        assert_eq!(
            shuffled.counts[k * block..(k + 1) * block],
            forward.counts[i * block..(i + 1) * block]
        );
    }
}

#[test]
fn single_kernel_on_constant_image_is_plain_constant_descriptor() {
    let img = GrayImage::filled(64, 64, 140.0).unwrap();
    let params = LghpParams::default();
    let bank = build_bank(&default_bank()[..1]).unwrap();
    let g = build_gabor_descriptor(&img, &params, &bank).unwrap();
    let plain = build_descriptor(&img, &params).unwrap();
    assert_eq!(g.counts, plain.counts);
}

#[test]
fn default_bank_descriptor_length() {
    let img = common::random_image(64, 64, 255, 1);
    let bank = build_bank(&default_bank()).unwrap();
    let d = build_gabor_descriptor(&img, &LghpParams::default(), &bank).unwrap();
    assert_eq!(d.len(), 36864);
}
