use chemgadget::encoding::{index_sets, max_locality, transform, EncodingScheme};
use chemgadget::fermion::{build_fermion_hamiltonian, IntegralTable};
use chemgadget::spectra::eig_dense;
use chemgadget::Letter;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn index_set_bounds() {
    for n in 1..=64usize {
        let log = (n as f64).log2().ceil() as usize;
        for j in 0..n {
            let s = index_sets(j, n).unwrap();
            assert!(s.update.len() <= log && s.parity.len() <= log, "n={n} j={j}");
            assert!(s.update.iter().all(|q| !s.parity.contains(q)));
            assert!(s.remainder.iter().all(|q| s.parity.contains(q)));
            assert!(s.flip.iter().all(|q| s.parity.contains(q)));
        }
    }
}

#[test]
fn bk_locality_grows_slower_than_jw() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut rows = Vec::new();
    for n in [4, 8, 16] {
        let fh = build_fermion_hamiltonian(&IntegralTable::random(n, &mut rng)).unwrap();
        let jw = max_locality(&transform(&fh, EncodingScheme::JordanWigner).unwrap());
        let bk = transform(&fh, EncodingScheme::BravyiKitaev).unwrap();
        assert!(bk.iter().all(|(t, _)| t.letters().filter(|(_, l)| *l == Letter::Y).count() % 2 == 0));
        rows.push((n, jw, max_locality(&bk)));
    }
    assert!(rows.windows(2).all(|w| w[1].1 > w[0].1), "{rows:?}");
    assert_eq!(rows.last().unwrap().1, 16);
    let (_, jw16, bk16) = rows[2];
    assert!(bk16 < jw16, "{rows:?}");
    // growth from 8 to 16 orbitals is additive for BK, doubling for JW
    assert!(rows[2].2 - rows[1].2 < rows[2].1 - rows[1].1, "{rows:?}");
}

#[test]
fn isospectral_up_to_five_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=5 {
        for _ in 0..20 {
            let fh = build_fermion_hamiltonian(&IntegralTable::random(n, &mut rng)).unwrap();
            let a = eig_dense(&transform(&fh, EncodingScheme::JordanWigner).unwrap(), 14).unwrap();
            let b = eig_dense(&transform(&fh, EncodingScheme::BravyiKitaev).unwrap(), 14).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-9, "n={n}: {x} vs {y}");
            }
        }
    }
}
