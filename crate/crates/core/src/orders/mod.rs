//! Orders in quaternion algebras: maximal orders by saturation, Eichler orders
//! of squarefree-coprime level, local matrix-unit frames.

mod lattice;

pub use lattice::{hermite_normal_form, kernel_mod, Lattice};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{factorize, gcd_u64, int, Rational};
use crate::quatalg::{QuatElement, QuaternionAlgebra};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderLattice {
    pub algebra: QuaternionAlgebra,
    pub lattice: Lattice,
    /// Level `N`; the discriminant is `algebra.discriminant`.
    pub level: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeIndexData {
    pub index: BigInt,
    pub local: Vec<(u64, u32)>,
}

impl OrderLattice {
    pub fn basis(&self) -> Vec<QuatElement> {
        self.lattice.basis()
    }

    pub fn gram(&self) -> Vec<Vec<Rational>> {
        self.lattice.gram(&self.algebra)
    }

    pub fn gram_determinant(&self) -> Rational {
        self.lattice.gram_determinant(&self.algebra)
    }

    /// `[L^# : L] = |det gram|`, with its factorization.
    pub fn index_data(&self) -> Result<LatticeIndexData> {
        let d = self.gram_determinant().abs();
        if !d.is_integer() {
            return Err(Error::Domain("lattice is not integral".into()));
        }
        let index = d.to_integer();
        let local = factorize(index.to_u64().ok_or_else(|| Error::Domain("index too large".into()))?);
        Ok(LatticeIndexData { index, local })
    }

    pub fn reduced_discriminant(&self) -> Result<BigInt> {
        let idx = self.index_data()?.index;
        let r = idx.sqrt();
        if &r * &r != idx {
            return Err(Error::Domain("Gram determinant is not a square".into()));
        }
        Ok(r)
    }

    pub fn dual(&self) -> Result<Lattice> {
        dual_lattice(&self.algebra, &self.lattice)
    }

    pub fn contains(&self, x: &QuatElement) -> bool {
        self.lattice.contains(x)
    }

    /// Contains 1, closed under multiplication, integral traces and norms.
    pub fn is_order(&self) -> bool {
        if !self.contains(&QuatElement::one()) {
            return false;
        }
        let b = self.basis();
        for x in &b {
            for y in &b {
                if !self.contains(&self.algebra.mul(x, y)) {
                    return false;
                }
            }
        }
        b.iter().all(|x| self.algebra.reduced_norm(x).is_integer() && x.reduced_trace().is_integer())
    }

    /// `det(x)` integral on the lattice: checked on basis vectors and pairwise sums.
    pub fn is_even_integral(&self) -> bool {
        is_even_integral(&self.algebra, &self.lattice)
    }

    pub fn to_canonical_string(&self) -> String {
        format!("{} {} {}|{}", self.algebra.a, self.algebra.b, self.level, self.lattice.to_canonical_string())
    }

    pub fn from_canonical_string(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("malformed order string: {s}"));
        let (head, lat) = s.split_once('|').ok_or_else(bad)?;
        let v: Vec<i64> = head.split_whitespace().map(|t| t.parse().map_err(|_| bad())).collect::<Result<_>>()?;
        if v.len() != 3 || v[2] < 1 {
            return Err(bad());
        }
        let algebra = QuaternionAlgebra::from_constants(v[0], v[1])?;
        let lattice = Lattice::from_canonical_string(lat)?;
        Ok(OrderLattice { algebra, lattice, level: v[2] as u64 })
    }
}

pub fn is_even_integral(alg: &QuaternionAlgebra, l: &Lattice) -> bool {
    let b = l.basis();
    (0..4).all(|r| {
        alg.reduced_norm(&b[r]).is_integer()
            && (r + 1..4).all(|s| alg.reduced_norm(&b[r].add(&b[s])).is_integer())
    })
}

pub fn dual_lattice(alg: &QuaternionAlgebra, l: &Lattice) -> Result<Lattice> {
    l.dual(alg)
}

/// `Z<1, i, j, k>`, an order because `a` and `b` are integers.
fn standard_order() -> Lattice {
    Lattice::from_generators(&[
        QuatElement::from_ints([1, 0, 0, 0]),
        QuatElement::from_ints([0, 1, 0, 0]),
        QuatElement::from_ints([0, 0, 1, 0]),
        QuatElement::from_ints([0, 0, 0, 1]),
    ])
    .expect("standard basis")
}

fn integral_ring(alg: &QuaternionAlgebra, l: &Lattice) -> bool {
    let g = l.gram(alg);
    g.iter().flatten().all(Rational::is_integer) && l.basis().iter().all(|x| alg.reduced_norm(x).is_integer())
}

/// Smallest ring containing `l` (which must contain 1), or `None` as soon as a
/// non-integral element appears.
fn ring_closure(alg: &QuaternionAlgebra, mut l: Lattice) -> Option<Lattice> {
    for _ in 0..64 {
        if !integral_ring(alg, &l) {
            return None;
        }
        let next = l.product(alg, &l);
        if next == l {
            return Some(l);
        }
        l = next;
    }
    None
}

/// Enumerates `l/pl` by integer coordinates in `[0, p)^4`, zero excluded.
fn residues(p: u64) -> impl Iterator<Item = [BigInt; 4]> {
    let p4 = p.pow(4);
    (1..p4).map(move |mut t| {
        std::array::from_fn(|_| {
            let c = t % p;
            t /= p;
            BigInt::from(c)
        })
    })
}

fn enlarge_at(alg: &QuaternionAlgebra, l: &Lattice, p: u64) -> Result<Lattice> {
    let pr = int(p as i64);
    let p2 = BigInt::from(p * p);
    for c in residues(p) {
        let x = l.element(&c);
        let t = x.reduced_trace().to_integer();
        let n = alg.reduced_norm(&x).to_integer();
        if !(t % BigInt::from(p)).is_zero() || !(n % &p2).is_zero() {
            continue;
        }
        let y = x.scale(&pr.recip());
        let mut gens = l.basis();
        gens.push(y);
        let cand = Lattice::from_generators(&gens)?;
        if let Some(closed) = ring_closure(alg, cand) {
            return Ok(closed);
        }
    }
    Err(Error::Construction(format!("saturation at {p} found no enlargement")))
}

/// A maximal order of `alg`, by saturating `Z<1, i, j, k>` prime by prime until
/// the Gram determinant equals `D^2`.
pub fn maximal_order(alg: &QuaternionAlgebra) -> Result<OrderLattice> {
    let target = int(alg.discriminant as i64).pow(2);
    let mut l = standard_order();
    loop {
        let det = l.gram_determinant(alg).abs();
        if det == target {
            break;
        }
        let ratio = &det / &target;
        let ratio = ratio
            .to_integer()
            .to_u64()
            .filter(|_| ratio.is_integer())
            .ok_or_else(|| Error::Construction(format!("discriminant ratio {ratio} is not a small integer")))?;
        let p = factorize(ratio)[0].0;
        l = enlarge_at(alg, &l, p)?;
    }
    let o = OrderLattice { algebra: alg.clone(), lattice: l, level: 1 };
    debug_assert!(o.is_order());
    Ok(o)
}

fn coords_mod(o: &Lattice, x: &QuatElement, m: &BigInt) -> [BigInt; 4] {
    let c = o.coords(x).expect("element lies in the order");
    c.map(|t| t.mod_floor(m))
}

fn mul_mod(alg: &QuaternionAlgebra, o: &Lattice, x: &[BigInt; 4], y: &[BigInt; 4], m: &BigInt) -> [BigInt; 4] {
    coords_mod(o, &alg.mul(&o.element(x), &o.element(y)), m)
}

fn reduce(c: &[BigInt; 4], m: &BigInt) -> [BigInt; 4] {
    std::array::from_fn(|t| c[t].mod_floor(m))
}

fn is_zero_mod(c: &[BigInt; 4], m: &BigInt) -> bool {
    c.iter().all(|t| (t.mod_floor(m)).is_zero())
}

/// Matrix units `e11, e12, e21, e22` of `O/p^k O`, as integer coordinates in the
/// order's HNF basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalSplitting {
    pub p: u64,
    pub k: u32,
    pub units: [[[BigInt; 4]; 2]; 2],
}

impl LocalSplitting {
    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.k)
    }

    /// Checks `e_ij e_kl = delta_jk e_il` and `e11 + e22 = 1` modulo `p^k O`.
    pub fn verify(&self, o: &OrderLattice) -> bool {
        let m = self.modulus();
        let alg = &o.algebra;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let prod = mul_mod(alg, &o.lattice, &self.units[i][j], &self.units[k][l], &m);
                        let expect = if j == k { reduce(&self.units[i][l], &m) } else { std::array::from_fn(|_| BigInt::zero()) };
                        if prod != expect {
                            return false;
                        }
                    }
                }
            }
        }
        let one = coords_mod(&o.lattice, &QuatElement::one(), &m);
        let sum: [BigInt; 4] = std::array::from_fn(|t| (&self.units[0][0][t] + &self.units[1][1][t]).mod_floor(&m));
        sum == one
    }
}

/// Matrix-unit frame of `O/p^k O` for `p` not dividing the discriminant.
pub fn local_splitting(o: &OrderLattice, p: u64, k: u32) -> Result<LocalSplitting> {
    let alg = &o.algebra;
    if alg.discriminant % p == 0 {
        return Err(Error::Domain(format!("{p} ramifies in the algebra; no local splitting")));
    }
    let pb = BigInt::from(p);
    let m = pb.pow(k);
    let l = &o.lattice;
    // a zero divisor mod p with unit trace gives an idempotent x / trd(x)
    let mut e = None;
    for c in residues(p) {
        let x = l.element(&c);
        let t = x.reduced_trace().to_integer().mod_floor(&pb);
        let n = alg.reduced_norm(&x).to_integer().mod_floor(&pb);
        if n.is_zero() && !t.is_zero() {
            let tinv = crate::exactnum::inv_mod(t.to_i64().unwrap(), p as i64).unwrap();
            e = Some(c.map(|ci| (ci * tinv).mod_floor(&pb)));
            break;
        }
    }
    let mut e = e.ok_or_else(|| Error::Construction(format!("no zero divisor found modulo {p}")))?;
    // Newton iteration e <- 3e^2 - 2e^3
    for _ in 0..64 {
        let e2 = mul_mod(alg, l, &e, &e, &m);
        if e2 == reduce(&e, &m) {
            break;
        }
        let e3 = mul_mod(alg, l, &e2, &e, &m);
        e = std::array::from_fn(|t| (BigInt::from(3) * &e2[t] - BigInt::from(2) * &e3[t]).mod_floor(&m));
    }
    let one = coords_mod(l, &QuatElement::one(), &m);
    let f: [BigInt; 4] = std::array::from_fn(|t| (&one[t] - &e[t]).mod_floor(&m));
    let basis_coords: Vec<[BigInt; 4]> =
        (0..4).map(|t| std::array::from_fn(|s| if s == t { BigInt::one() } else { BigInt::zero() })).collect();
    let sandwich = |left: &[BigInt; 4], y: &[BigInt; 4], right: &[BigInt; 4]| {
        let ly = mul_mod(alg, l, left, y, &m);
        mul_mod(alg, l, &ly, right, &m)
    };
    let e12 = basis_coords
        .iter()
        .map(|b| sandwich(&e, b, &f))
        .find(|u| !is_zero_mod(u, &pb))
        .ok_or_else(|| Error::Construction("no off-diagonal unit found".into()))?;
    // the coordinate of e that is a unit mod p reads off scalars of e O e
    let unit_pos = (0..4)
        .find(|&t| !(e[t].mod_floor(&pb)).is_zero())
        .ok_or_else(|| Error::Construction("idempotent vanishes mod p".into()))?;
    let mut e21 = None;
    for b in &basis_coords {
        let w = sandwich(&f, b, &e);
        let uw = mul_mod(alg, l, &e12, &w, &m);
        let einv = crate::exactnum::inv_mod((e[unit_pos].mod_floor(&m)).to_i64().unwrap(), m.to_i64().unwrap()).unwrap();
        let lambda = (&uw[unit_pos] * einv).mod_floor(&m);
        if (lambda.mod_floor(&pb)).is_zero() {
            continue;
        }
        let scaled: [BigInt; 4] = std::array::from_fn(|t| (&lambda * &e[t]).mod_floor(&m));
        if scaled != uw {
            continue;
        }
        let linv = crate::exactnum::inv_mod(lambda.to_i64().unwrap(), m.to_i64().unwrap()).unwrap();
        e21 = Some(w.map(|t| (t * linv).mod_floor(&m)));
        break;
    }
    let e21 = e21.ok_or_else(|| Error::Construction("no dual off-diagonal unit found".into()))?;
    let split = LocalSplitting { p, k, units: [[e, e12], [e21, f]] };
    if !split.verify(o) {
        return Err(Error::Construction(format!("matrix-unit relations fail modulo {p}^{k}")));
    }
    Ok(split)
}

/// Eichler order of level `n` inside a maximal order: at each `p^k || n`, the
/// elements whose lower-left entry in a local matrix frame vanishes mod `p^k`.
pub fn eichler_order(omax: &OrderLattice, n: u64) -> Result<OrderLattice> {
    if n == 0 || gcd_u64(n, omax.algebra.discriminant) != 1 {
        return Err(Error::InvalidParameters(format!(
            "level {n} must be positive and coprime to the discriminant {}",
            omax.algebra.discriminant
        )));
    }
    let mut o = omax.clone();
    for (p, k) in factorize(n) {
        let split = local_splitting(&o, p, k)?;
        let m = split.modulus();
        let [[e, _], [_, f]] = &split.units;
        let alg = &o.algebra;
        let rows: Vec<Vec<BigInt>> = (0..4)
            .map(|t| {
                let b: [BigInt; 4] = std::array::from_fn(|s| if s == t { BigInt::one() } else { BigInt::zero() });
                let fb = mul_mod(alg, &o.lattice, f, &b, &m);
                mul_mod(alg, &o.lattice, &fb, e, &m).to_vec()
            })
            .collect();
        let ker = kernel_mod(&rows, &m);
        let gens: Vec<QuatElement> = ker.iter().map(|c| o.lattice.element(c)).collect();
        let lattice = Lattice::from_generators(&gens)?;
        o = OrderLattice { algebra: o.algebra.clone(), lattice, level: o.level * p.pow(k) };
    }
    let expect = int((omax.algebra.discriminant * n) as i64).pow(2);
    if o.gram_determinant().abs() != expect || !o.is_order() {
        return Err(Error::Construction(format!("Eichler order of level {n} failed its certificate")));
    }
    Ok(o)
}
