//! BLS12-381 group kernels for phr_abe.
//!
//! Thin PyO3 layer over arkworks. Scalars cross the boundary as 32-byte
//! big-endian strings, already reduced by the caller. Encodings are the
//! zcash compressed formats for G1/G2 and 12 big-endian Fp limbs (tower
//! order) for GT, so they match the pure-Python backend byte for byte.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use ark_bls12_381::{g2, Bls12_381, Fq, Fq12, Fq2, Fq6, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{AffineRepr, CurveGroup, PrimeGroup};
use ark_ff::field_hashers::DefaultFieldHasher;
use ark_ff::{BigInteger, Field, One, PrimeField, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize, Compress, Validate};
use pyo3::exceptions::{PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use sha2::Sha256;

type G2Hasher = MapToCurveBasedHasher<G2Projective, DefaultFieldHasher<Sha256, 128>, WBMap<g2::Config>>;

const GT_BYTES: usize = 576;

fn scalar(k: &[u8]) -> Fr {
    Fr::from_be_bytes_mod_order(k)
}

fn bad_encoding(what: &str) -> PyErr {
    PyValueError::new_err(format!("invalid {what} encoding"))
}

fn hash_bytes(b: &[u8]) -> u64 {
    let mut h = DefaultHasher::new();
    b.hash(&mut h);
    h.finish()
}

#[pyclass(frozen, module = "phr_abe._native")]
pub struct G1 {
    p: G1Projective,
}

#[pyclass(frozen, module = "phr_abe._native")]
pub struct G2 {
    p: G2Projective,
}

#[pyclass(frozen, module = "phr_abe._native")]
pub struct GT {
    v: PairingOutput<Bls12_381>,
}

fn g1_bytes(p: &G1Projective) -> Vec<u8> {
    let mut out = Vec::with_capacity(48);
    p.into_affine().serialize_with_mode(&mut out, Compress::Yes).unwrap();
    out
}

fn g2_bytes(p: &G2Projective) -> Vec<u8> {
    let mut out = Vec::with_capacity(96);
    p.into_affine().serialize_with_mode(&mut out, Compress::Yes).unwrap();
    out
}

fn fq_be(x: &Fq, out: &mut Vec<u8>) {
    out.extend_from_slice(&x.into_bigint().to_bytes_be());
}

fn gt_bytes(v: &PairingOutput<Bls12_381>) -> Vec<u8> {
    let f = v.0;
    let mut out = Vec::with_capacity(GT_BYTES);
    for c6 in [f.c0, f.c1] {
        for c2 in [c6.c0, c6.c1, c6.c2] {
            fq_be(&c2.c0, &mut out);
            fq_be(&c2.c1, &mut out);
        }
    }
    out
}

fn fq_from_be(b: &[u8]) -> Option<Fq> {
    let x = Fq::from_be_bytes_mod_order(b);
    // reject non-canonical limbs
    if x.into_bigint().to_bytes_be() == b {
        Some(x)
    } else {
        None
    }
}

fn gt_from(b: &[u8]) -> Option<PairingOutput<Bls12_381>> {
    if b.len() != GT_BYTES {
        return None;
    }
    let mut limbs = Vec::with_capacity(12);
    for chunk in b.chunks(48) {
        limbs.push(fq_from_be(chunk)?);
    }
    let fq2 = |i: usize| Fq2::new(limbs[i], limbs[i + 1]);
    let f = Fq12::new(Fq6::new(fq2(0), fq2(2), fq2(4)), Fq6::new(fq2(6), fq2(8), fq2(10)));
    if f.is_zero() {
        return None;
    }
    // subgroup membership: f^r == 1
    if !f.pow(Fr::MODULUS).is_one() {
        return None;
    }
    Some(PairingOutput(f))
}

#[pymethods]
impl G1 {
    #[staticmethod]
    fn generator() -> Self {
        G1 { p: G1Projective::generator() }
    }

    #[staticmethod]
    fn identity() -> Self {
        G1 { p: G1Projective::zero() }
    }

    #[staticmethod]
    fn from_bytes(b: &[u8]) -> PyResult<Self> {
        if b.len() != 48 {
            return Err(bad_encoding("G1"));
        }
        let a = G1Affine::deserialize_with_mode(b, Compress::Yes, Validate::Yes)
            .map_err(|_| bad_encoding("G1"))?;
        Ok(G1 { p: a.into_group() })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &g1_bytes(&self.p))
    }

    fn is_identity(&self) -> bool {
        self.p.is_zero()
    }

    fn mul(&self, other: &G1) -> Self {
        G1 { p: self.p + other.p }
    }

    fn div(&self, other: &G1) -> Self {
        G1 { p: self.p - other.p }
    }

    fn inverse(&self) -> Self {
        G1 { p: -self.p }
    }

    fn pow(&self, k: &[u8]) -> Self {
        G1 { p: self.p * scalar(k) }
    }

    fn __eq__(&self, other: &Bound<'_, PyAny>) -> bool {
        match other.cast::<G1>() {
            Ok(o) => self.p == o.get().p,
            Err(_) => false,
        }
    }

    fn __hash__(&self) -> u64 {
        hash_bytes(&g1_bytes(&self.p))
    }
}

#[pymethods]
impl G2 {
    #[staticmethod]
    fn generator() -> Self {
        G2 { p: G2Projective::generator() }
    }

    #[staticmethod]
    fn identity() -> Self {
        G2 { p: G2Projective::zero() }
    }

    #[staticmethod]
    fn from_bytes(b: &[u8]) -> PyResult<Self> {
        if b.len() != 96 {
            return Err(bad_encoding("G2"));
        }
        let a = G2Affine::deserialize_with_mode(b, Compress::Yes, Validate::Yes)
            .map_err(|_| bad_encoding("G2"))?;
        Ok(G2 { p: a.into_group() })
    }

    #[staticmethod]
    fn hash(msg: &[u8], dst: &[u8]) -> PyResult<Self> {
        let h = G2Hasher::new(dst).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let a = h.hash(msg).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(G2 { p: a.into_group() })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &g2_bytes(&self.p))
    }

    fn is_identity(&self) -> bool {
        self.p.is_zero()
    }

    fn mul(&self, other: &G2) -> Self {
        G2 { p: self.p + other.p }
    }

    fn div(&self, other: &G2) -> Self {
        G2 { p: self.p - other.p }
    }

    fn inverse(&self) -> Self {
        G2 { p: -self.p }
    }

    fn pow(&self, k: &[u8]) -> Self {
        G2 { p: self.p * scalar(k) }
    }

    fn __eq__(&self, other: &Bound<'_, PyAny>) -> bool {
        match other.cast::<G2>() {
            Ok(o) => self.p == o.get().p,
            Err(_) => false,
        }
    }

    fn __hash__(&self) -> u64 {
        hash_bytes(&g2_bytes(&self.p))
    }
}

#[pymethods]
impl GT {
    #[staticmethod]
    fn identity() -> Self {
        GT { v: PairingOutput::zero() }
    }

    #[staticmethod]
    fn from_bytes(b: &[u8]) -> PyResult<Self> {
        gt_from(b).map(|v| GT { v }).ok_or_else(|| bad_encoding("GT"))
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &gt_bytes(&self.v))
    }

    fn is_identity(&self) -> bool {
        self.v.is_zero()
    }

    fn mul(&self, other: &GT) -> Self {
        GT { v: self.v + other.v }
    }

    fn div(&self, other: &GT) -> Self {
        GT { v: self.v - other.v }
    }

    fn inverse(&self) -> Self {
        GT { v: -self.v }
    }

    fn pow(&self, k: &[u8]) -> Self {
        GT { v: self.v * scalar(k) }
    }

    fn __eq__(&self, other: &Bound<'_, PyAny>) -> bool {
        match other.cast::<GT>() {
            Ok(o) => self.v == o.get().v,
            Err(_) => false,
        }
    }

    fn __hash__(&self) -> u64 {
        hash_bytes(&gt_bytes(&self.v))
    }
}

#[pyfunction]
fn pair(a: &G1, b: &G2) -> GT {
    GT { v: Bls12_381::pairing(a.p, b.p) }
}

/// Product of pairings with a single final exponentiation.
#[pyfunction]
fn multi_pair(a: Vec<PyRef<'_, G1>>, b: Vec<PyRef<'_, G2>>) -> PyResult<GT> {
    if a.len() != b.len() {
        return Err(PyTypeError::new_err("multi_pair needs equal-length sequences"));
    }
    let left: Vec<G1Affine> = a.iter().map(|x| x.p.into_affine()).collect();
    let right: Vec<G2Affine> = b.iter().map(|x| x.p.into_affine()).collect();
    Ok(GT { v: Bls12_381::multi_pairing(left, right) })
}

#[pymodule]
fn _native(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<G1>()?;
    m.add_class::<G2>()?;
    m.add_class::<GT>()?;
    m.add_function(wrap_pyfunction!(pair, m)?)?;
    m.add_function(wrap_pyfunction!(multi_pair, m)?)?;
    Ok(())
}
