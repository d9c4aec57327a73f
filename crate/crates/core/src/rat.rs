//! Exact rational scalars and `p`-adic valuations of rationals.
//!
//! Every scalar in this crate is a [`Rat`] (arbitrary-precision rational);
//! serialized form is always the decimal string `a` or `a/b`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;
pub type Int = BigInt;

pub fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

/// Multiplicity of `p` in a nonzero integer.
pub fn int_ord_p(p: &Int, n: &Int) -> i64 {
    assert!(!n.is_zero());
    let mut k = 0i64;
    let mut m = n.abs();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, p);
        if r.is_zero() {
            k += 1;
            m = q;
        } else {
            return k;
        }
    }
}

/// `v_p` of a rational, `None` for zero. Normalized by `v_p(p) = 1`.
pub fn rat_vp(p: &Int, x: &Rat) -> Option<Rat> {
    if x.is_zero() {
        return None;
    }
    let v = int_ord_p(p, x.numer()) - int_ord_p(p, x.denom());
    Some(rat_i64(v))
}

/// `p^k` for a (possibly negative) integer exponent.
pub fn rat_pow_int(base: &Int, k: i64) -> Rat {
    let mut acc = Rat::one();
    let b = Rat::from_integer(base.clone());
    if k >= 0 {
        for _ in 0..k {
            acc *= &b;
        }
    } else {
        let inv = Rat::one() / b;
        for _ in 0..(-k) {
            acc *= &inv;
        }
    }
    acc
}

/// Parses `"a"` or `"a/b"` with optional sign; whitespace is trimmed.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let n: Int = num
        .parse()
        .map_err(|_| format!("bad integer {num:?} in rational {s:?}"))?;
    let d: Int = den
        .parse()
        .map_err(|_| format!("bad integer {den:?} in rational {s:?}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in rational {s:?}"));
    }
    Ok(Rat::new(n, d))
}

/// Canonical string form: `a` for integers, `a/b` otherwise.
pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "1", "-3", "5/6", "-7/2"] {
            let x = parse_rat(s).unwrap();
            assert_eq!(format_rat(&x), s);
        }
        assert_eq!(format_rat(&parse_rat("4/6").unwrap()), "2/3");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn vp_of_rationals() {
        let p = Int::from(5);
        assert_eq!(rat_vp(&p, &rat_i64(5)), Some(rat_i64(1)));
        assert_eq!(rat_vp(&p, &rat_i64(1)), Some(rat_i64(0)));
        assert_eq!(rat_vp(&p, &rat_frac(1, 25)), Some(rat_i64(-2)));
        assert_eq!(rat_vp(&p, &rat_i64(0)), None);
        assert_eq!(rat_vp(&p, &rat_frac(50, 3)), Some(rat_i64(2)));
    }
}
