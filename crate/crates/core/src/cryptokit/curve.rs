//! Short Weierstrass curve arithmetic parameterized by [`CurveParams`].
//!
//! Internally points are kept in Jacobian coordinates over a Montgomery
//! field context; the public surface exposes affine points with plain
//! (non-Montgomery) coordinates.

use std::sync::OnceLock;

use super::u256::{MontCtx, U256};
use super::CryptoError;

/// A point on the curve in affine coordinates, or the point at infinity.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum CurvePoint {
    Infinity,
    Affine { x: U256, y: U256 },
}

impl CurvePoint {
    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }

    /// Uncompressed SEC1 encoding: `04 || x || y`. Infinity is not encodable.
    pub fn encode(&self) -> [u8; 65] {
        match self {
            CurvePoint::Infinity => panic!("cannot encode the point at infinity"),
            CurvePoint::Affine { x, y } => {
                let mut out = [0u8; 65];
                out[0] = 0x04;
                out[1..33].copy_from_slice(&x.to_be_bytes());
                out[33..65].copy_from_slice(&y.to_be_bytes());
                out
            }
        }
    }
}

/// Domain parameters for a 256-bit prime-order short Weierstrass curve.
pub struct CurveParams {
    name: String,
    /// Field context mod the curve prime.
    fp: MontCtx,
    /// Field context mod the group order, used for scalar arithmetic.
    fq: MontCtx,
    a_mont: U256,
    b_mont: U256,
    generator: CurvePoint,
    /// Montgomery-form affine generator for the hot path.
    g_mont: (U256, U256),
}

// Jacobian point in Montgomery form; z == 0 encodes infinity.
#[derive(Clone, Copy)]
struct Jac {
    x: U256,
    y: U256,
    z: U256,
}

static P256: OnceLock<CurveParams> = OnceLock::new();

impl CurveParams {
    /// Constructs and validates curve parameters from big-endian hex strings.
    pub fn new(
        name: &str,
        p_hex: &str,
        a_hex: &str,
        b_hex: &str,
        gx_hex: &str,
        gy_hex: &str,
        n_hex: &str,
    ) -> Result<CurveParams, CryptoError> {
        let parse = |s: &str| {
            U256::from_hex(s).ok_or_else(|| CryptoError::InvalidCurve(format!("bad hex: {s}")))
        };
        let p = parse(p_hex)?;
        let a = parse(a_hex)?;
        let b = parse(b_hex)?;
        let gx = parse(gx_hex)?;
        let gy = parse(gy_hex)?;
        let n = parse(n_hex)?;
        if p.0[0] & 1 == 0 || n.0[0] & 1 == 0 {
            return Err(CryptoError::InvalidCurve("p and n must be odd".into()));
        }
        let fp = MontCtx::new(p);
        let fq = MontCtx::new(n);
        let a_mont = fp.to_mont(&a);
        let b_mont = fp.to_mont(&b);
        let generator = CurvePoint::Affine { x: gx, y: gy };
        let g_mont = (fp.to_mont(&gx), fp.to_mont(&gy));
        let params = CurveParams {
            name: name.to_string(),
            fp,
            fq,
            a_mont,
            b_mont,
            generator,
            g_mont,
        };
        if !params.is_on_curve(&generator) {
            return Err(CryptoError::InvalidCurve("generator not on curve".into()));
        }
        // G must have order n.
        if !params.scalar_mul(&n, &generator).is_infinity() {
            return Err(CryptoError::InvalidCurve(
                "generator order does not match n".into(),
            ));
        }
        Ok(params)
    }

    /// NIST P-256 (secp256r1), the default curve of the toolkit.
    pub fn p256() -> &'static CurveParams {
        P256.get_or_init(|| {
            CurveParams::new(
                "p256",
                "ffffffff00000001000000000000000000000000ffffffffffffffffffffffff",
                "ffffffff00000001000000000000000000000000fffffffffffffffffffffffc",
                "5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604b",
                "6b17d1f2e12c4247f8bce6e563a440f277037d812deb33a0f4a13945d898c296",
                "4fe342e2fe1a7f9b8ee7eb4a7c0f9e162bce33576b315ececbb6406837bf51f5",
                "ffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551",
            )
            .expect("P-256 parameters are valid")
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generator(&self) -> CurvePoint {
        self.generator
    }

    pub fn order(&self) -> &U256 {
        self.fq.modulus()
    }

    pub fn prime(&self) -> &U256 {
        self.fp.modulus()
    }

    /// Scalar-field Montgomery context (mod n), used by ECDSA.
    pub(crate) fn scalar_ctx(&self) -> &MontCtx {
        &self.fq
    }

    pub fn is_on_curve(&self, point: &CurvePoint) -> bool {
        match point {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => {
                if *x >= *self.fp.modulus() || *y >= *self.fp.modulus() {
                    return false;
                }
                let xm = self.fp.to_mont(x);
                let ym = self.fp.to_mont(y);
                let lhs = self.fp.square(&ym);
                let x2 = self.fp.square(&xm);
                let x3 = self.fp.mul(&x2, &xm);
                let ax = self.fp.mul(&self.a_mont, &xm);
                let rhs = self.fp.add(&self.fp.add(&x3, &ax), &self.b_mont);
                lhs == rhs
            }
        }
    }

    /// Decodes an uncompressed SEC1 point and checks it lies on the curve.
    pub fn decode_point(&self, bytes: &[u8]) -> Result<CurvePoint, CryptoError> {
        if bytes.len() != 65 || bytes[0] != 0x04 {
            return Err(CryptoError::InvalidPoint);
        }
        let x = U256::from_be_bytes(bytes[1..33].try_into().unwrap());
        let y = U256::from_be_bytes(bytes[33..65].try_into().unwrap());
        let pt = CurvePoint::Affine { x, y };
        if self.is_on_curve(&pt) {
            Ok(pt)
        } else {
            Err(CryptoError::InvalidPoint)
        }
    }

    pub fn point_add(&self, p: &CurvePoint, q: &CurvePoint) -> CurvePoint {
        let jp = self.to_jac(p);
        let jq = self.to_jac(q);
        self.to_affine(&self.jac_add(&jp, &jq))
    }

    /// k * P by 4-bit windowed double-and-add.
    pub fn scalar_mul(&self, k: &U256, point: &CurvePoint) -> CurvePoint {
        let jp = self.to_jac(point);
        self.to_affine(&self.jac_scalar_mul(k, &jp))
    }

    /// k * G.
    pub fn mul_g(&self, k: &U256) -> CurvePoint {
        let g = Jac {
            x: self.g_mont.0,
            y: self.g_mont.1,
            z: self.fp.one(),
        };
        self.to_affine(&self.jac_scalar_mul(k, &g))
    }

    /// u1 * G + u2 * Q, the ECDSA verification combination.
    pub fn mul_g_add_mul(&self, u1: &U256, u2: &U256, q: &CurvePoint) -> CurvePoint {
        let g = Jac {
            x: self.g_mont.0,
            y: self.g_mont.1,
            z: self.fp.one(),
        };
        let a = self.jac_scalar_mul(u1, &g);
        let b = self.jac_scalar_mul(u2, &self.to_jac(q));
        self.to_affine(&self.jac_add(&a, &b))
    }

    fn to_jac(&self, p: &CurvePoint) -> Jac {
        match p {
            CurvePoint::Infinity => Jac {
                x: self.fp.one(),
                y: self.fp.one(),
                z: U256::ZERO,
            },
            CurvePoint::Affine { x, y } => Jac {
                x: self.fp.to_mont(x),
                y: self.fp.to_mont(y),
                z: self.fp.one(),
            },
        }
    }

    fn to_affine(&self, p: &Jac) -> CurvePoint {
        if p.z.is_zero() {
            return CurvePoint::Infinity;
        }
        let zi = self.fp.inv(&p.z);
        let zi2 = self.fp.square(&zi);
        let zi3 = self.fp.mul(&zi2, &zi);
        let x = self.fp.mul(&p.x, &zi2);
        let y = self.fp.mul(&p.y, &zi3);
        CurvePoint::Affine {
            x: self.fp.from_mont(&x),
            y: self.fp.from_mont(&y),
        }
    }

    fn jac_double(&self, p: &Jac) -> Jac {
        let f = &self.fp;
        if p.z.is_zero() || p.y.is_zero() {
            return Jac {
                x: f.one(),
                y: f.one(),
                z: U256::ZERO,
            };
        }
        // Standard dbl-2007-bl style formulas with a generic curve `a`.
        let xx = f.square(&p.x);
        let yy = f.square(&p.y);
        let yyyy = f.square(&yy);
        let zz = f.square(&p.z);
        let s = {
            let t = f.square(&f.add(&p.x, &yy));
            let t = f.sub(&t, &xx);
            let t = f.sub(&t, &yyyy);
            f.add(&t, &t)
        };
        let m = {
            let three_xx = f.add(&f.add(&xx, &xx), &xx);
            let zz2 = f.square(&zz);
            f.add(&three_xx, &f.mul(&self.a_mont, &zz2))
        };
        let x3 = f.sub(&f.square(&m), &f.add(&s, &s));
        let y3 = {
            let eight_yyyy = {
                let t = f.add(&yyyy, &yyyy);
                let t = f.add(&t, &t);
                f.add(&t, &t)
            };
            f.sub(&f.mul(&m, &f.sub(&s, &x3)), &eight_yyyy)
        };
        let z3 = {
            let t = f.square(&f.add(&p.y, &p.z));
            f.sub(&f.sub(&t, &yy), &zz)
        };
        Jac {
            x: x3,
            y: y3,
            z: z3,
        }
    }

    fn jac_add(&self, p: &Jac, q: &Jac) -> Jac {
        let f = &self.fp;
        if p.z.is_zero() {
            return *q;
        }
        if q.z.is_zero() {
            return *p;
        }
        let z1z1 = f.square(&p.z);
        let z2z2 = f.square(&q.z);
        let u1 = f.mul(&p.x, &z2z2);
        let u2 = f.mul(&q.x, &z1z1);
        let s1 = f.mul(&p.y, &f.mul(&q.z, &z2z2));
        let s2 = f.mul(&q.y, &f.mul(&p.z, &z1z1));
        if u1 == u2 {
            if s1 == s2 {
                return self.jac_double(p);
            }
            return Jac {
                x: f.one(),
                y: f.one(),
                z: U256::ZERO,
            };
        }
        let h = f.sub(&u2, &u1);
        let i = {
            let t = f.add(&h, &h);
            f.square(&t)
        };
        let j = f.mul(&h, &i);
        let r = {
            let t = f.sub(&s2, &s1);
            f.add(&t, &t)
        };
        let v = f.mul(&u1, &i);
        let x3 = f.sub(&f.sub(&f.square(&r), &j), &f.add(&v, &v));
        let y3 = {
            let t = f.mul(&s1, &j);
            let t2 = f.add(&t, &t);
            f.sub(&f.mul(&r, &f.sub(&v, &x3)), &t2)
        };
        let z3 = {
            let t = f.square(&f.add(&p.z, &q.z));
            let t = f.sub(&f.sub(&t, &z1z1), &z2z2);
            f.mul(&t, &h)
        };
        Jac {
            x: x3,
            y: y3,
            z: z3,
        }
    }

    fn jac_scalar_mul(&self, k: &U256, p: &Jac) -> Jac {
        let infinity = Jac {
            x: self.fp.one(),
            y: self.fp.one(),
            z: U256::ZERO,
        };
        if k.is_zero() || p.z.is_zero() {
            return infinity;
        }
        // Precompute 1P..15P for a 4-bit window.
        let mut table = [infinity; 16];
        table[1] = *p;
        for i in 2..16 {
            table[i] = if i % 2 == 0 {
                self.jac_double(&table[i / 2])
            } else {
                self.jac_add(&table[i - 1], p)
            };
        }
        let mut acc = infinity;
        let mut started = false;
        for i in (0..64).rev() {
            if started {
                acc = self.jac_double(&acc);
                acc = self.jac_double(&acc);
                acc = self.jac_double(&acc);
                acc = self.jac_double(&acc);
            }
            let w = k.nibble(i) as usize;
            if w != 0 {
                acc = self.jac_add(&acc, &table[w]);
                started = true;
            }
        }
        acc
    }
}

impl std::fmt::Debug for CurveParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurveParams").field("name", &self.name).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_round_trips_through_encoding() {
        let params = CurveParams::p256();
        let g = params.generator();
        let decoded = params.decode_point(&g.encode()).unwrap();
        assert_eq!(decoded, g);
    }

    #[test]
    fn off_curve_point_rejected() {
        let params = CurveParams::p256();
        let mut bytes = params.generator().encode();
        bytes[64] ^= 1;
        assert!(params.decode_point(&bytes).is_err());
    }

    #[test]
    fn small_multiples_are_consistent() {
        let params = CurveParams::p256();
        let g = params.generator();
        let two_g = params.point_add(&g, &g);
        assert_eq!(params.scalar_mul(&U256::from_u64(2), &g), two_g);
        let three_g = params.point_add(&two_g, &g);
        assert_eq!(params.scalar_mul(&U256::from_u64(3), &g), three_g);
        assert_eq!(params.mul_g(&U256::from_u64(3)), three_g);
    }

    #[test]
    fn order_times_generator_is_infinity() {
        let params = CurveParams::p256();
        let n = *params.order();
        assert!(params.mul_g(&n).is_infinity());
        // (n - 1) G = -G
        let (n1, _) = n.sub_borrow(&U256::ONE);
        match (params.mul_g(&n1), params.generator()) {
            (CurvePoint::Affine { x, y }, CurvePoint::Affine { x: gx, .. }) => {
                assert_eq!(x, gx);
                assert_ne!(y, U256::ZERO);
            }
            _ => panic!("expected affine points"),
        }
    }

    #[test]
    fn mul_g_add_mul_matches_separate_ops() {
        let params = CurveParams::p256();
        let q = params.mul_g(&U256::from_u64(77));
        let lhs = params.mul_g_add_mul(&U256::from_u64(5), &U256::from_u64(11), &q);
        let rhs = params.point_add(
            &params.mul_g(&U256::from_u64(5)),
            &params.scalar_mul(&U256::from_u64(11), &q),
        );
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn known_scalar_multiple() {
        // k = 2 on P-256, public test value (SEC / NIST point doubling).
        let params = CurveParams::p256();
        let two_g = params.mul_g(&U256::from_u64(2));
        match two_g {
            CurvePoint::Affine { x, y } => {
                assert_eq!(
                    hex::encode(x.to_be_bytes()),
                    "7cf27b188d034f7e8a52380304b51ac3c08969e277f21b35a60b48fc47669978"
                );
                assert_eq!(
                    hex::encode(y.to_be_bytes()),
                    "07775510db8ed040293d9ac69f7430dbba7dade63ce982299e04b79d227873d1"
                );
            }
            _ => panic!("2G must be affine"),
        }
    }
}
