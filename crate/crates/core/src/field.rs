//! Structure-passing field abstraction.
//!
//! Elements are plain data; a `Field` value carries the arithmetic (and, for
//! the tower layers, the `Arc<Tower>` context). Linear algebra in [`crate::mat`]
//! is generic over this trait.

use crate::rat::{rat_i64, Rat};
use crate::tower::Tower;
use num_traits::Zero;
use std::fmt::Debug;
use std::sync::Arc;

pub trait Field: Clone {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// `None` exactly on zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn from_int(&self, n: i64) -> Self::Elem {
        let mut acc = self.zero();
        let one = self.one();
        for _ in 0..n.unsigned_abs() {
            acc = self.add(&acc, &one);
        }
        if n < 0 {
            self.neg(&acc)
        } else {
            acc
        }
    }
}

/// The prime field model: plain rationals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = Rat;

    fn zero(&self) -> Rat {
        Rat::zero()
    }
    fn one(&self) -> Rat {
        rat_i64(1)
    }
    fn add(&self, a: &Rat, b: &Rat) -> Rat {
        a + b
    }
    fn neg(&self, a: &Rat) -> Rat {
        -a
    }
    fn mul(&self, a: &Rat, b: &Rat) -> Rat {
        a * b
    }
    fn inv(&self, a: &Rat) -> Option<Rat> {
        if a.is_zero() {
            None
        } else {
            Some(rat_i64(1) / a)
        }
    }
    fn is_zero(&self, a: &Rat) -> bool {
        a.is_zero()
    }
    fn from_int(&self, n: i64) -> Rat {
        rat_i64(n)
    }
}

/// The unramified layer `K0` of a tower.
#[derive(Clone)]
pub struct K0Field(pub Arc<Tower>);

impl Field for K0Field {
    type Elem = Vec<Rat>;

    fn zero(&self) -> Vec<Rat> {
        self.0.k0_zero()
    }
    fn one(&self) -> Vec<Rat> {
        self.0.k0_one()
    }
    fn add(&self, a: &Vec<Rat>, b: &Vec<Rat>) -> Vec<Rat> {
        self.0.k0_add(a, b)
    }
    fn neg(&self, a: &Vec<Rat>) -> Vec<Rat> {
        self.0.k0_neg(a)
    }
    fn mul(&self, a: &Vec<Rat>, b: &Vec<Rat>) -> Vec<Rat> {
        self.0.k0_mul(a, b)
    }
    fn inv(&self, a: &Vec<Rat>) -> Option<Vec<Rat>> {
        self.0.k0_inv(a)
    }
    fn is_zero(&self, a: &Vec<Rat>) -> bool {
        self.0.k0_is_zero(a)
    }
    fn from_int(&self, n: i64) -> Vec<Rat> {
        self.0.k0_from_rat(rat_i64(n))
    }
}

/// The ramified top layer `K` of a tower.
#[derive(Clone)]
pub struct KField(pub Arc<Tower>);

impl Field for KField {
    type Elem = Vec<Rat>;

    fn zero(&self) -> Vec<Rat> {
        self.0.k_zero()
    }
    fn one(&self) -> Vec<Rat> {
        self.0.k_one()
    }
    fn add(&self, a: &Vec<Rat>, b: &Vec<Rat>) -> Vec<Rat> {
        self.0.k_add(a, b)
    }
    fn neg(&self, a: &Vec<Rat>) -> Vec<Rat> {
        self.0.k_neg(a)
    }
    fn mul(&self, a: &Vec<Rat>, b: &Vec<Rat>) -> Vec<Rat> {
        self.0.k_mul(a, b)
    }
    fn inv(&self, a: &Vec<Rat>) -> Option<Vec<Rat>> {
        self.0.k_inv(a)
    }
    fn is_zero(&self, a: &Vec<Rat>) -> bool {
        self.0.k_is_zero(a)
    }
    fn from_int(&self, n: i64) -> Vec<Rat> {
        self.0.k_embed(&self.0.k0_from_rat(rat_i64(n)))
    }
}
