//! Basis-state reflections: permutations as products of transpositions, and
//! multi-controlled single-qubit gates up to a diagonal.

use crate::gates::{Control, Gate, Mat2, StructuredCircuit};
use crate::numerics::{check_bijection, Amplitude, NumericsError, ZERO};

/// Gates swapping basis states `a != b` of an `n`-qubit register and fixing
/// all others: CNOTs from a differing qubit `q` make the two states adjacent
/// in `q`, then an `(n-1)`-controlled NOT exchanges them.
fn transposition(n: usize, a: usize, b: usize) -> Vec<Gate> {
    let bit = |x: usize, q: usize| (x >> (n - 1 - q)) & 1 == 1;
    let q = (0..n).find(|&q| bit(a, q) != bit(b, q)).expect("distinct states");
    let adjust: Vec<Gate> = (0..n)
        .filter(|&t| t != q && bit(a, t) != bit(b, t))
        .map(|t| if bit(a, q) { Gate::cnot(q, t) } else { Gate::mcx(vec![Control::off(q)], t) })
        .collect();
    let controls = (0..n)
        .filter(|&c| c != q)
        .map(|c| Control {
            qubit: c,
            polarity: bit(b, c),
        })
        .collect();
    let mut gates = adjust.clone();
    gates.push(Gate::mcx(controls, q));
    gates.extend(adjust.into_iter().rev());
    gates
}

/// Circuit for `|x> -> |perm[x]>` built from at most `2^n - 1` transpositions.
pub fn perm_via_householder(perm: &[usize]) -> Result<StructuredCircuit, NumericsError> {
    let dim = perm.len();
    let n = crate::numerics::log2_exact(dim)? as usize;
    check_bijection(perm, dim)?;
    // forward reduction: fix the image of each basis state in turn
    let mut cur = perm.to_vec();
    let mut forward = Vec::new();
    for i in 0..dim {
        let r = cur[i];
        if r == i {
            continue;
        }
        forward.extend(transposition(n, i, r));
        for c in cur.iter_mut() {
            if *c == i {
                *c = r;
            } else if *c == r {
                *c = i;
            }
        }
    }
    let mut c = StructuredCircuit::new(n.max(1));
    c.extend(forward.iter().rev().map(Gate::dagger));
    Ok(c)
}

/// `k`-controlled `u` (controls `0..k`, target `k`) up to a diagonal: the
/// penultimate column is reduced by a standard reflection about a vector
/// supported on `|1..1>|0>` and `|1..1>|1>`, realized as a single-qubit
/// basis change around a `k`-controlled NOT.
pub fn controlled_u_via_householder(k: usize, u: &Mat2) -> StructuredCircuit {
    let mut c = StructuredCircuit::new(k + 1);
    let (a, b) = (u[0][0], u[1][0]);
    if b.norm() <= 1e-14 {
        return c;
    }
    // Householder vector of the target-qubit column (a, b) onto |0>
    let theta = std::f64::consts::PI + crate::numerics::arg0(a);
    let e = crate::numerics::cis(theta);
    let (d0, d1) = (a - e, b);
    let nrm = (d0.norm_sqr() + d1.norm_sqr()).sqrt();
    let (v0, v1) = (d0 / nrm, d1 / nrm);
    // S|0> = v, then A = S X H so that A C(X) A^dagger = I - 2|1..1,v><1..1,v|
    let s: Mat2 = [[v0, -v1.conj()], [v1, v0.conj()]];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let xh: Mat2 = [
        [Amplitude::new(h, 0.0), Amplitude::new(-h, 0.0)],
        [Amplitude::new(h, 0.0), Amplitude::new(h, 0.0)],
    ];
    let a_mat = mul2(&s, &xh);
    let a_dag = [
        [a_mat[0][0].conj(), a_mat[1][0].conj()],
        [a_mat[0][1].conj(), a_mat[1][1].conj()],
    ];
    c.push(Gate::Single {
        target: k,
        matrix: a_dag,
    });
    c.push(Gate::mcx((0..k).map(Control::on).collect(), k));
    c.push(Gate::Single {
        target: k,
        matrix: a_mat,
    });
    c
}

fn mul2(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}
