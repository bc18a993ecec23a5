use loglp_core::{Params, TorusGrid};
use loglp_harness::corpus::{default_band, gen_weight};
use loglp_harness::{gen_corpus, gen_weights, CorpusKind, CorpusSpec, HarnessError, WeightKind};

fn params(dim: usize) -> Params {
    Params::new(dim, 2.0, 1.0).unwrap()
}

#[test]
fn members_are_normalized_and_band_limited() {
    for (dim, n) in [(1, 1024), (2, 128)] {
        let grid = TorusGrid::new(dim, n).unwrap();
        let band = (3, 4);
        for kind in [CorpusKind::RandomBandlimited, CorpusKind::WavePacket, CorpusKind::Tone, CorpusKind::ChirpLog] {
            let members = gen_corpus(&CorpusSpec::new(kind, 3, band, 5), &grid, &params(dim)).unwrap();
            assert_eq!(members.len(), 3);
            for m in &members {
                assert!((m.field.coeff_l2() - 1.0).abs() < 1e-12, "{}", m.label);
                for (i, c) in m.field.coeffs().iter().enumerate() {
                    if c.norm() > 0.0 {
                        let r: f64 = grid.frequency_norm(i);
                        assert!((8.0..=16.0).contains(&r), "{} has |ξ| = {r}", m.label);
                    }
                }
            }
        }
    }
}

#[test]
fn tones_are_single_unit_coefficients() {
    let grid = TorusGrid::new(1, 1024).unwrap();
    let members = gen_corpus(&CorpusSpec::new(CorpusKind::Tone, 4, (3, 5), 0), &grid, &params(1)).unwrap();
    for (i, m) in members.iter().enumerate() {
        let freq = 1i64 << (3 + i as i32 % 3);
        assert_eq!(m.field.at(&[freq]).re, 1.0);
        assert_eq!(m.field.coeffs().iter().filter(|c| c.norm() > 0.0).count(), 1);
    }
}

#[test]
fn same_seed_gives_same_function_on_finer_grids() {
    let coarse = TorusGrid::new(1, 512).unwrap();
    let fine = TorusGrid::new(1, 1024).unwrap();
    for kind in [CorpusKind::RandomBandlimited, CorpusKind::WavePacket] {
        let spec = CorpusSpec::new(kind, 2, (3, 6), 17);
        let a = gen_corpus(&spec, &coarse, &params(1)).unwrap();
        let b = gen_corpus(&spec, &fine, &params(1)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            for f in -64i64..=64 {
                assert_eq!(x.field.at(&[f]), y.field.at(&[f]));
            }
        }
    }
}

#[test]
fn seeds_and_kinds_decorrelate() {
    let grid = TorusGrid::new(1, 512).unwrap();
    let a = gen_corpus(&CorpusSpec::new(CorpusKind::RandomBandlimited, 1, (3, 5), 1), &grid, &params(1)).unwrap();
    let b = gen_corpus(&CorpusSpec::new(CorpusKind::RandomBandlimited, 1, (3, 5), 2), &grid, &params(1)).unwrap();
    assert_ne!(a[0].field, b[0].field);
}

#[test]
fn bad_bands_are_rejected() {
    let grid = TorusGrid::new(1, 256).unwrap();
    for band in [(0, 3), (5, 4), (3, 6)] {
        let err = gen_corpus(&CorpusSpec::new(CorpusKind::Tone, 1, band, 0), &grid, &params(1)).unwrap_err();
        assert!(matches!(err, HarnessError::Band { .. }), "{band:?}");
    }
    assert!(gen_corpus(&CorpusSpec::new(CorpusKind::Tone, 0, (0, 0), 0), &grid, &params(1)).unwrap().is_empty());
}

#[test]
fn default_mix_and_band() {
    let grid = TorusGrid::new(1, 4096).unwrap();
    let p = params(1);
    assert_eq!(default_band(&p, &grid), (p.k0 + 4, 8));
    let mix = CorpusSpec::default_mix((7, 8), 3);
    let counts: Vec<(CorpusKind, usize)> = mix.iter().map(|s| (s.kind, s.count)).collect();
    assert_eq!(
        counts,
        vec![(CorpusKind::RandomBandlimited, 8), (CorpusKind::WavePacket, 4), (CorpusKind::Tone, 4)]
    );
}

#[test]
fn weights_are_positive_and_labelled() {
    let grid = TorusGrid::new(1, 1024).unwrap();
    let ws = gen_weights(&WeightKind::ALL, 9, &grid);
    assert_eq!(ws.len(), 4);
    for w in &ws {
        assert!(w.field.values().iter().all(|&v| v >= 0.0 && v.is_finite()), "{}", w.label);
        assert!(w.field.max() > 0.0);
    }
    assert!(ws[0].field.values().iter().all(|&v| v == 1.0));
    // |x - x0|^{-1/2} capped at 0.01^{-1/2} = 10
    assert!((ws[3].field.max() - 10.0).abs() < 1e-12);
    let again = gen_weight(WeightKind::SmoothRandom, 9, 2, &grid);
    assert_eq!(again.field, ws[2].field);
}
