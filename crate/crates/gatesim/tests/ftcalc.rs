use gatesim::ftcalc::{cnot_error_bound, optimal_code_length, FtParams};
use gatesim::Error;

fn reference(n: u32) -> FtParams {
    FtParams { n, eps_g: 1e-5, eps_g_prime: 1e-9, eps_m: 0.01 }
}

#[test]
fn eleven_qubit_block_bound() {
    let b = cnot_error_bound(&reference(11)).unwrap();
    // 4·C(11,6)·(33e-5 + 0.02)^6 + 847e-9 by direct evaluation
    assert!((b.exact_bound - 9.774746794973336e-07).abs() < 1e-18);
    assert!(b.exact_bound < 1e-6);
    assert!(b.exact_bound <= b.stirling_bound);
}

#[test]
fn trivial_bounds() {
    let zero = cnot_error_bound(&FtParams { n: 7, eps_g: 0.0, eps_g_prime: 0.0, eps_m: 0.0 }).unwrap();
    assert_eq!(zero.exact_bound, 0.0);
    assert_eq!(zero.stirling_bound, 0.0);
    let one = FtParams { n: 1, eps_g: 1e-3, eps_g_prime: 1e-4, eps_m: 2e-3 };
    let b = cnot_error_bound(&one).unwrap();
    assert!((b.exact_bound - (4.0 * (3e-3 + 4e-3) + 7e-4)).abs() < 1e-15);
    assert!(cnot_error_bound(&FtParams { n: 4, ..one }).is_err());
    assert!(cnot_error_bound(&FtParams { eps_m: 1.5, ..one }).is_err());
}

#[test]
fn code_length_selection() {
    assert_eq!(optimal_code_length(1e-5, 1e-9, 0.01, 1e-6).unwrap(), 11);
    assert!(cnot_error_bound(&reference(9)).unwrap().exact_bound > 1e-6);
    let loose = optimal_code_length(1e-5, 1e-9, 0.01, 1e-3).unwrap();
    assert!(loose <= 11 && loose % 2 == 1);
    assert_eq!(loose, 5);
    match optimal_code_length(1e-5, 1e-2, 0.01, 1e-6) {
        Err(Error::Infeasible { floor, .. }) => assert!(floor > 1e-6),
        other => panic!("expected infeasible, got {other:?}"),
    }
    assert!(optimal_code_length(1e-5, 1e-9, 0.01, 0.0).is_err());
}
