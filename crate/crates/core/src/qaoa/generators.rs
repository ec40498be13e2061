use num_complex::Complex64;

use crate::sim::CMatrix;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_vec(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_vec(2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap()
}

fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    factors[1..].iter().fold(factors[0].clone(), |acc, f| acc.kron(f))
}

/// Two-qubit excitation-hopping generator `−½(X⊗Y − Y⊗X)`, tensor order
/// (qubit k of block t, qubit k of block t′).
pub fn s_generator() -> CMatrix {
    let (x, y) = (pauli_x(), pauli_y());
    kron_all(&[&x, &y]).sub(&kron_all(&[&y, &x])).scale(c(-0.5, 0.0))
}

/// Three-qubit generator `−¼(XXY + XYX − YXX + YYY)`, tensor order
/// (qubit k+1 of block t, qubit k of block t, qubit k of block t′).
pub fn p_generator() -> CMatrix {
    let (x, y) = (pauli_x(), pauli_y());
    kron_all(&[&x, &x, &y])
        .add(&kron_all(&[&x, &y, &x]))
        .sub(&kron_all(&[&y, &x, &x]))
        .add(&kron_all(&[&y, &y, &y]))
        .scale(c(-0.25, 0.0))
}
