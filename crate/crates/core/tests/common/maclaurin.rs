//! Exact-rational Maclaurin series for `Ai` and `Ai′`.
//!
//! `Ai(x) = c₁f(x) − c₂g(x)` with `f = Σ 3^k(1/3)_k x^{3k}/(3k)!`, `g = Σ 3^k(2/3)_k x^{3k+1}/(3k+1)!`,
//! `c₁ = Ai(0)`, `c₂ = −Ai′(0)` taken to 60 digits. All arithmetic is exact, so the
//! cancellation between `f` and `g` at large `x` costs nothing.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const AI0: &str = "0.355028053887817239260063186004183176397979174199177240583327";
const MINUS_AI0_PRIME: &str = "0.258819403792806798405183560189203963479091138354934582210002";

fn decimal(text: &str) -> BigRational {
    let (int, frac) = text.split_once('.').unwrap();
    let num: BigInt = format!("{int}{frac}").parse().unwrap();
    BigRational::new(num, BigInt::from(10).pow(frac.len() as u32))
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

/// `(f, f′, g, g′)` at `x`, summed until terms fall below `10⁻⁴⁰` in magnitude.
fn series(x: &BigRational) -> [BigRational; 4] {
    let x3 = x * x * x;
    let tiny = BigRational::new(BigInt::one(), BigInt::from(10).pow(40));
    let mut f = BigRational::one();
    let mut g = x.clone();
    let mut fp = BigRational::zero();
    let mut gp = BigRational::one();
    // Coefficients of x^{3k}, x^{3k+1} without the power.
    let mut a = BigRational::one();
    let mut b = BigRational::one();
    let mut xp = BigRational::one();
    for k in 1..400u32 {
        let k3 = BigInt::from(3 * k);
        a /= BigRational::from_integer((&k3 - 1) * &k3);
        b /= BigRational::from_integer(&k3 * (&k3 + 1));
        let prev = xp.clone();
        xp = &xp * &x3;
        let tf = &a * &xp;
        let tg = &b * &xp * x;
        f += &tf;
        g += &tg;
        // d/dx x^{3k} = 3k x^{3k−1} = 3k x^{3k−3} x²;  d/dx x^{3k+1} = (3k+1) x^{3k}.
        fp += &a * BigRational::from_integer(k3.clone()) * &prev * x * x;
        gp += &b * BigRational::from_integer(&k3 + 1) * &xp;
        if k > 4 && tf.abs() < tiny && tg.abs() < tiny {
            break;
        }
    }
    [f, fp, g, gp]
}

pub fn airy_ai(x: f64) -> f64 {
    let [f, _, g, _] = series(&exact(x));
    (decimal(AI0) * f - decimal(MINUS_AI0_PRIME) * g).to_f64().unwrap()
}

pub fn airy_ai_prime(x: f64) -> f64 {
    let [_, fp, _, gp] = series(&exact(x));
    (decimal(AI0) * fp - decimal(MINUS_AI0_PRIME) * gp).to_f64().unwrap()
}
