//! `HU` recomputed from a Gaussian form assembled in corner coordinates.

use ncphi4::exact::{det, q, qi, Rational};
use ncphi4::parametric::HuPolynomial;
use ncphi4::ribbon::RibbonGraph;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One eigenblock of the amputated Gaussian form, assembled in corner
/// coordinates straight from the propagator and vertex exponents:
/// lines give `(x_a − x_b)²/t + t(x_a + x_b)²`, vertices the phase `±2s`
/// between corners, non-root vertices a Fourier variable coupled to the
/// alternating corner sum.
pub fn corner_block(g: &RibbonGraph, t: &[Rational], s: &Rational, sign: i64) -> Vec<Vec<Rational>> {
    let corners: Vec<usize> = (0..g.n_half_edges()).filter(|&h| !g.is_external(h)).collect();
    let idx = |h: usize| corners.iter().position(|&c| c == h);
    let verts: Vec<usize> = (0..g.n_vertices()).filter(|&v| v != g.root()).collect();
    let n = corners.len() + verts.len();
    let mut m = vec![vec![Rational::zero(); n]; n];
    for (l, tl) in t.iter().enumerate() {
        let [a, b] = g.line(l);
        let (a, b) = (idx(a).unwrap(), idx(b).unwrap());
        let inv = tl.recip();
        m[a][a] += &inv + tl;
        m[b][b] += &inv + tl;
        m[a][b] += tl - &inv;
        m[b][a] += tl - &inv;
    }
    for v in 0..g.n_vertices() {
        for i in 0..4 {
            for j in i + 1..4 {
                let (Some(a), Some(b)) = (idx(4 * v + i), idx(4 * v + j)) else { continue };
                // 1-based (−1)^{i+j+1}
                let c = if (i + j) % 2 == 0 { -1 } else { 1 };
                let k = qi(2 * sign * c) * s;
                m[a][b] += &k;
                m[b][a] -= k;
            }
        }
    }
    for (k, &v) in verts.iter().enumerate() {
        let r = corners.len() + k;
        for i in 0..4 {
            if let Some(a) = idx(4 * v + i) {
                let sg = if i % 2 == 0 { qi(1) } else { qi(-1) };
                m[r][a] = sg.clone();
                m[a][r] = sg;
            }
        }
    }
    m
}

pub fn random_rational<R: Rng>(rng: &mut R, lo: i64, hi: i64, den: i64) -> Rational {
    q(rng.gen_range(lo * den + 1..hi * den), den)
}

/// `HU²` against the product of the two corner-block determinants at 20
/// random rational points; the ratio must be one constant.
pub fn check_against_corner_oracle(g: &RibbonGraph, hu: &HuPolynomial, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut ratio: Option<Rational> = None;
    for _ in 0..20 {
        let t: Vec<Rational> = (0..g.n_lines()).map(|_| random_rational(rng, 0, 1, 97)).collect();
        let s = random_rational(rng, 0, 3, 13);
        let prod_t = t.iter().fold(Rational::one(), |a, x| a * x);
        let oracle = &prod_t * &prod_t * det(&corner_block(g, &t, &s, 1)) * det(&corner_block(g, &t, &s, -1));
        if oracle.is_zero() {
            return Err(format!("vanishing oracle for\n{}", g.serialize()));
        }
        let h = hu.eval_exact(&t, &s);
        let r = &h * &h / oracle;
        match &ratio {
            None => ratio = Some(r),
            Some(r0) if *r0 != r => return Err(format!("HU^2 / oracle not constant for\n{}", g.serialize())),
            Some(_) => {}
        }
    }
    Ok(())
}
