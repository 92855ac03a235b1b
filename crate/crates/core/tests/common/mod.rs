//! Independent reference model: explicit two-qubit density matrix, projective
//! measurement along equatorial analysis directions, then outcome-by-outcome
//! enumeration of the readout channels.

#![allow(dead_code)]

use num_complex::Complex64;

type Ket2 = [Complex64; 2];
type Matrix4 = [[Complex64; 4]; 4];

const UP: usize = 0;
const DOWN: usize = 1;

/// Werner state around the singlet in the basis `|uu>, |ud>, |du>, |dd>`.
fn werner_singlet(v: f64) -> Matrix4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = [0.0, s, -s, 0.0];
    let mut rho = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in rho.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let mixed = if i == j { (1.0 - v) / 4.0 } else { 0.0 };
            *cell = Complex64::new(v * psi[i] * psi[j] + mixed, 0.0);
        }
    }
    rho
}

/// Outcome kets for an analysis angle `theta` (degrees).
fn analysis_kets(theta_deg: f64) -> [Ket2; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phase = Complex64::from_polar(1.0, 2.0 * theta_deg.to_radians());
    let one = Complex64::new(s, 0.0);
    [[one, phase * s], [one, -phase * s]]
}

fn kron(a: &Ket2, b: &Ket2) -> [Complex64; 4] {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

fn expectation(rho: &Matrix4, ket: &[Complex64; 4]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            acc += ket[i].conj() * rho[i][j] * ket[j];
        }
    }
    acc.re
}

/// Ideal outcome probabilities `p[x][y]`, `x` for the first particle.
pub fn ideal(v: f64, alpha_deg: f64, beta_deg: f64) -> [[f64; 2]; 2] {
    let rho = werner_singlet(v);
    let a = analysis_kets(alpha_deg);
    let b = analysis_kets(beta_deg);
    let mut p = [[0.0; 2]; 2];
    for x in [UP, DOWN] {
        for y in [UP, DOWN] {
            p[x][y] = expectation(&rho, &kron(&a[x], &b[y]));
        }
    }
    p
}

/// `channel[x][x']`: probability of reporting `x'` for true outcome `x`.
type Channel = [[f64; 2]; 2];

fn symmetric(a: f64) -> Channel {
    [[a, 1.0 - a], [1.0 - a, a]]
}

/// "Up" survives with probability `p_d`; "down" is never mistaken for "up".
fn lossy_up(p_d: f64) -> Channel {
    [[p_d, 1.0 - p_d], [0.0, 1.0]]
}

fn then(first: &Channel, second: &Channel) -> Channel {
    let mut out = [[0.0; 2]; 2];
    for x in 0..2 {
        for z in 0..2 {
            out[x][z] = (0..2).map(|y| first[x][y] * second[y][z]).sum();
        }
    }
    out
}

fn enumerate(p: [[f64; 2]; 2], channel: &Channel) -> [f64; 4] {
    let mut out = [[0.0; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            for xr in 0..2 {
                for yr in 0..2 {
                    out[xr][yr] += p[x][y] * channel[x][xr] * channel[y][yr];
                }
            }
        }
    }
    [out[UP][UP], out[UP][DOWN], out[DOWN][UP], out[DOWN][DOWN]]
}

/// `[p_uu, p_ud, p_du, p_dd]` under fluorescence readout with accuracy `a_det`.
pub fn fluorescence(v: f64, a_det: f64, alpha_deg: f64, beta_deg: f64) -> [f64; 4] {
    enumerate(ideal(v, alpha_deg, beta_deg), &symmetric(a_det))
}

/// `[p_uu, p_ud, p_du, p_dd]` under ionization readout.
pub fn ionization(v: f64, a_st: f64, p_d: f64, alpha_deg: f64, beta_deg: f64) -> [f64; 4] {
    enumerate(
        ideal(v, alpha_deg, beta_deg),
        &then(&symmetric(a_st), &lossy_up(p_d)),
    )
}

pub fn correlation(p: &[f64; 4]) -> f64 {
    p[0] + p[3] - p[1] - p[2]
}

/// `S` from four oracle distributions in CHSH order.
pub fn chsh(p: [[f64; 4]; 4]) -> f64 {
    let e = p.map(|d| correlation(&d));
    (e[0] + e[1]).abs() + (e[2] - e[3]).abs()
}

/// `n` evenly spaced points from `lo` to `hi`, both included.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
