// Copyright 2026 The relsvm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Commutative monoids and semirings, and SumProd / SumSum evaluation over a
//! join tree.

mod engine;

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub(crate) use engine::Messages;
pub use engine::{eval_sumprod, eval_sumsum};

/// `(S, ⊕, I_0)` with `⊕` associative and commutative.
pub trait CommutativeMonoid {
    type Elem: Clone;

    fn identity(&self) -> Self::Elem;
    fn combine(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
}

/// `(R, ⊕, ⊗, I_0, I_1)`: both operations commutative monoids, `⊗`
/// distributes over `⊕`, and `I_0` annihilates.
///
/// The engine treats carrier values as opaque and trusts these laws.
pub trait CommutativeSemiring {
    type Elem: Clone;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    /// Lets the engine skip work that would be annihilated.
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn add_assign(&self, acc: &mut Self::Elem, b: &Self::Elem) {
        *acc = self.add(acc, b);
    }
}

type Factor<'f, E> = Box<dyn Fn(f64) -> E + Send + Sync + 'f>;

/// Per-attribute functions `F_i` from a column value to the carrier.
///
/// Attributes without an entry map to the neutral element of the query
/// (`I_1` for SumProd, `I_0` for SumSum).
pub struct FactorAssignment<'f, E> {
    factors: HashMap<String, Factor<'f, E>>,
}

impl<'f, E> FactorAssignment<'f, E> {
    pub fn new() -> Self {
        FactorAssignment {
            factors: HashMap::new(),
        }
    }

    pub fn with(mut self, attribute: &str, f: impl Fn(f64) -> E + Send + Sync + 'f) -> Self {
        self.set(attribute, f);
        self
    }

    pub fn set(&mut self, attribute: &str, f: impl Fn(f64) -> E + Send + Sync + 'f) {
        self.factors.insert(attribute.to_string(), Box::new(f));
    }

    pub fn get(&self, attribute: &str) -> Option<&(dyn Fn(f64) -> E + Send + Sync + 'f)> {
        self.factors.get(attribute).map(|f| f.as_ref())
    }
}

impl<E> Default for FactorAssignment<'_, E> {
    fn default() -> Self {
        Self::new()
    }
}

/// `(ℕ, +, ×)` with arbitrary precision.
#[derive(Clone, Copy, Debug, Default)]
pub struct Counting;

impl CommutativeSemiring for Counting {
    type Elem = BigUint;

    fn zero(&self) -> BigUint {
        BigUint::zero()
    }
    fn one(&self) -> BigUint {
        BigUint::one()
    }
    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a + b
    }
    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b
    }
    fn is_zero(&self, a: &BigUint) -> bool {
        a.is_zero()
    }
    fn add_assign(&self, acc: &mut BigUint, b: &BigUint) {
        *acc += b;
    }
}

/// `(ℝ, +, ×)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct RealSumProduct;

impl CommutativeSemiring for RealSumProduct {
    type Elem = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn is_zero(&self, a: &f64) -> bool {
        *a == 0.0
    }
}

/// `(ℝ ∪ {∞}, min, +)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct MinPlus;

impl CommutativeSemiring for MinPlus {
    type Elem = f64;

    fn zero(&self) -> f64 {
        f64::INFINITY
    }
    fn one(&self) -> f64 {
        0.0
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a.min(*b)
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn is_zero(&self, a: &f64) -> bool {
        *a == f64::INFINITY
    }
}

/// `(ℝ ∪ {-∞}, max, +)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct MaxPlus;

impl CommutativeSemiring for MaxPlus {
    type Elem = f64;

    fn zero(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn one(&self) -> f64 {
        0.0
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a.max(*b)
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn is_zero(&self, a: &f64) -> bool {
        *a == f64::NEG_INFINITY
    }
}

/// `({false, true}, ∨, ∧)`: join emptiness.
#[derive(Clone, Copy, Debug, Default)]
pub struct Boolean;

impl CommutativeSemiring for Boolean {
    type Elem = bool;

    fn zero(&self) -> bool {
        false
    }
    fn one(&self) -> bool {
        true
    }
    fn add(&self, a: &bool, b: &bool) -> bool {
        *a || *b
    }
    fn mul(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }
    fn is_zero(&self, a: &bool) -> bool {
        !*a
    }
}

/// `(ℝ, +, 0)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct RealSum;

impl CommutativeMonoid for RealSum {
    type Elem = f64;

    fn identity(&self) -> f64 {
        0.0
    }
    fn combine(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
}

/// `(ℕ, +, 0)` with arbitrary precision.
#[derive(Clone, Copy, Debug, Default)]
pub struct NatSum;

impl CommutativeMonoid for NatSum {
    type Elem = BigUint;

    fn identity(&self) -> BigUint {
        BigUint::zero()
    }
    fn combine(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a + b
    }
}

/// `(ℝ ∪ {∞}, min, ∞)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Min;

impl CommutativeMonoid for Min {
    type Elem = f64;

    fn identity(&self) -> f64 {
        f64::INFINITY
    }
    fn combine(&self, a: &f64, b: &f64) -> f64 {
        a.min(*b)
    }
}

/// `(ℝ ∪ {-∞}, max, -∞)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Max;

impl CommutativeMonoid for Max {
    type Elem = f64;

    fn identity(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn combine(&self, a: &f64, b: &f64) -> f64 {
        a.max(*b)
    }
}

/// `a ⊕ a ⊕ … ⊕ a` (`n` copies) by doubling.
pub fn repeat<M: CommutativeMonoid>(monoid: &M, a: &M::Elem, n: &BigUint) -> M::Elem {
    let mut acc = monoid.identity();
    let mut power = a.clone();
    let bits = n.bits();
    for i in 0..bits {
        if n.bit(i) {
            acc = monoid.combine(&acc, &power);
        }
        if i + 1 < bits {
            power = monoid.combine(&power, &power);
        }
    }
    acc
}

/// Pairs `(count, partial aggregate)`: the semiring that turns a SumSum query
/// into one SumProd query.
///
/// `(n₁, s₁) ⊕ (n₂, s₂) = (n₁ + n₂, s₁ ⊕ s₂)` and
/// `(n₁, s₁) ⊗ (n₂, s₂) = (n₁n₂, n₂·s₁ ⊕ n₁·s₂)`, where `n·s` is repeated `⊕`.
pub struct CountedSum<'m, M>(pub &'m M);

impl<M: CommutativeMonoid> CommutativeSemiring for CountedSum<'_, M> {
    type Elem = (BigUint, M::Elem);

    fn zero(&self) -> Self::Elem {
        (BigUint::zero(), self.0.identity())
    }
    fn one(&self) -> Self::Elem {
        (BigUint::one(), self.0.identity())
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        (&a.0 + &b.0, self.0.combine(&a.1, &b.1))
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let left = repeat(self.0, &a.1, &b.0);
        let right = repeat(self.0, &b.1, &a.0);
        (&a.0 * &b.0, self.0.combine(&left, &right))
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.0.is_zero()
    }
}
