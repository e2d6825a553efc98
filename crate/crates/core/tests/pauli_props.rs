use chemgadget::pauli::{parse_pauli_text, Digits, DEFAULT_TOLERANCE};
use chemgadget::{PauliSum, PauliTerm};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

// Oracle: build the dense matrix by Kronecker products of the 2x2 Pauli letters,
// independently of the bitmask kernels.
fn kron_dense(t: &PauliTerm) -> DMatrix<Complex64> {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let id = DMatrix::from_row_slice(2, 2, &[l, o, o, l]);
    let x = DMatrix::from_row_slice(2, 2, &[o, l, l, o]);
    let y = DMatrix::from_row_slice(2, 2, &[o, -i, i, o]);
    let z = DMatrix::from_row_slice(2, 2, &[l, o, o, -l]);
    let mut m = DMatrix::from_element(1, 1, l);
    // highest qubit is the most significant factor
    for q in (0..t.n_qubits()).rev() {
        let f = match t.letter(q) {
            chemgadget::Letter::I => &id,
            chemgadget::Letter::X => &x,
            chemgadget::Letter::Y => &y,
            chemgadget::Letter::Z => &z,
        };
        m = m.kronecker(f);
    }
    m
}

fn term(n: usize) -> impl Strategy<Value = PauliTerm> {
    let mask = (1u64 << n) - 1;
    (0..=mask, 0..=mask).prop_map(move |(x, z)| PauliTerm::from_masks(n, x, z).unwrap())
}

fn sum(n: usize) -> impl Strategy<Value = PauliSum> {
    prop::collection::vec((term(n), -2.0f64..2.0, -1.0f64..1.0), 0..8).prop_map(move |ts| {
        let mut s = PauliSum::zero(n);
        for (t, re, im) in ts {
            s.add_term(t, Complex64::new(re, im)).unwrap();
        }
        s
    })
}

#[test]
fn exhaustive_two_qubit_products() {
    for a in 0..16u64 {
        for b in 0..16u64 {
            let ta = PauliTerm::from_masks(2, a & 3, a >> 2).unwrap();
            let tb = PauliTerm::from_masks(2, b & 3, b >> 2).unwrap();
            let (ph, p) = ta.mul(&tb).unwrap();
            let lhs = kron_dense(&ta) * kron_dense(&tb);
            assert!((&lhs - kron_dense(&p) * ph.to_complex()).norm() < 1e-12);
            let comm = &lhs - kron_dense(&tb) * kron_dense(&ta);
            assert_eq!(ta.commutes(&tb).unwrap(), comm.norm() == 0.0);
        }
    }
}

#[test]
fn to_dense_agrees_with_kronecker() {
    for x in 0..8u64 {
        for z in 0..8u64 {
            let t = PauliTerm::from_masks(3, x, z).unwrap();
            assert!((t.to_dense().unwrap() - kron_dense(&t)).norm() < 1e-15);
        }
    }
}

proptest! {
    #[test]
    fn product_matches_dense_4q(a in term(4), b in term(4)) {
        let (ph, p) = a.mul(&b).unwrap();
        let lhs = kron_dense(&a) * kron_dense(&b);
        prop_assert!((lhs - kron_dense(&p) * ph.to_complex()).norm() < 1e-12);
    }

    #[test]
    fn commutes_matches_dense_4q(a in term(4), b in term(4)) {
        let c = kron_dense(&a) * kron_dense(&b) - kron_dense(&b) * kron_dense(&a);
        prop_assert_eq!(a.commutes(&b).unwrap(), c.norm() == 0.0);
    }

    #[test]
    fn simplify_is_idempotent_and_close(s in sum(3), tol in 0.0f64..0.5) {
        let once = s.simplify(tol);
        prop_assert_eq!(once.simplify(tol), once.clone());
        let dropped = s.len() - once.len();
        let diff = (s.to_dense().unwrap() - once.to_dense().unwrap()).norm() / (8f64).sqrt();
        prop_assert!(diff <= tol * (dropped as f64) + 1e-12);
    }

    #[test]
    fn hermitian_flag_matches_dense(s in sum(2), real in any::<bool>()) {
        let s = if real {
            let mut r = PauliSum::zero(2);
            for (t, c) in s.iter() {
                r.add_term(t.clone(), Complex64::new(c.re, 0.0)).unwrap();
            }
            r
        } else {
            s
        };
        let m = s.to_dense().unwrap();
        let herm = (&m - m.adjoint()).norm() < 1e-12;
        prop_assert_eq!(s.is_hermitian(), herm);
    }

    #[test]
    fn product_of_sums_matches_dense(a in sum(3), b in sum(3)) {
        let p = a.product(&b).unwrap();
        let want = a.to_dense().unwrap() * b.to_dense().unwrap();
        prop_assert!((p.to_dense().unwrap() - want).norm() < 1e-10);
    }

    #[test]
    fn text_round_trip(s in sum(4)) {
        let s = s.simplify(DEFAULT_TOLERANCE);
        let back = parse_pauli_text(&s.to_text(Digits::RoundTrip)).unwrap();
        prop_assert_eq!(back, s);
    }
}
