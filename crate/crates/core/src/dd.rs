//! Double-double arithmetic: an unevaluated sum of two `f64` words giving
//! roughly 106 bits of significand.
//!
//! Used for the extended-precision constraint solve and for evaluating
//! signals whose sinc weights span many more decades than `f64` can cancel.
//! Only the operations the solver needs are implemented.

/// A number represented as `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const DD_PI: Dd = Dd {
    hi: 3.141592653589793,
    lo: 1.2246467991473532e-16,
};
pub const DD_FRAC_PI_2: Dd = Dd {
    hi: 1.5707963267948966,
    lo: 6.123233995736766e-17,
};

/// 1/k! for k = 2..=33, split into (hi, lo) words.
const INV_FACT: [(f64, f64); 32] = [
    (0.5, 0.0),
    (0.16666666666666666, 9.25185853854297e-18),
    (0.041666666666666664, 2.3129646346357427e-18),
    (0.008333333333333333, 1.1564823173178714e-19),
    (0.001388888888888889, -5.300543954373577e-20),
    (0.0001984126984126984, 1.7209558293420705e-22),
    (2.48015873015873e-05, 2.1511947866775882e-23),
    (2.7557319223985893e-06, -1.858393274046472e-22),
    (2.755731922398589e-07, 2.3767714622250297e-23),
    (2.505210838544172e-08, -1.448814070935912e-24),
    (2.08767569878681e-09, -1.20734505911326e-25),
    (1.6059043836821613e-10, 1.2585294588752098e-26),
    (1.1470745597729725e-11, 2.0655512752830745e-28),
    (7.647163731819816e-13, 7.03872877733453e-30),
    (4.779477332387385e-14, 4.399205485834081e-31),
    (2.8114572543455206e-15, 1.6508842730861433e-31),
    (1.5619206968586225e-16, 1.1910679660273754e-32),
    (8.22063524662433e-18, 2.2141894119604265e-34),
    (4.110317623312165e-19, 1.4412973378659527e-36),
    (1.9572941063391263e-20, -1.3643503830087908e-36),
    (8.896791392450574e-22, -7.911402614872376e-38),
    (3.868170170630684e-23, -8.843177655482344e-40),
    (1.6117375710961184e-24, -3.6846573564509766e-41),
    (6.446950284384474e-26, -1.9330404233703465e-42),
    (2.4795962632247976e-27, -1.2953730964765229e-43),
    (9.183689863795546e-29, 1.4303150396787322e-45),
    (3.279889237069838e-30, 1.5117542744029879e-46),
    (1.1309962886447716e-31, 1.0498015412959506e-47),
    (3.7699876288159054e-33, 2.5870347832750324e-49),
    (1.216125041553518e-34, 5.586290567888806e-51),
    (3.8003907548547434e-36, 1.7457158024652518e-52),
    (1.151633562077195e-37, -6.09957445788454e-54),
];

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b|
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn zero() -> Self {
        Dd { hi: 0.0, lo: 0.0 }
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::zero();
        }
        // one Newton step on a f64 seed doubles the accurate digits
        let y = self.hi.sqrt();
        let yd = Dd::from_f64(y);
        let r = (self - yd * yd) / Dd::from_f64(2.0 * y);
        yd + r
    }

    /// Exact product of two plain `f64` values as a `Dd`.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        Dd { hi: p, lo: e }
    }

    /// sin with argument reduction modulo pi/2; valid for |x| well below 2^52.
    pub fn sin(self) -> Self {
        let (r, quadrant) = reduce_pi_2(self);
        match quadrant {
            0 => sin_taylor(r),
            1 => cos_taylor(r),
            2 => -sin_taylor(r),
            _ => -cos_taylor(r),
        }
    }

    pub fn cos(self) -> Self {
        let (r, quadrant) = reduce_pi_2(self);
        match quadrant {
            0 => cos_taylor(r),
            1 => -sin_taylor(r),
            2 => -cos_taylor(r),
            _ => sin_taylor(r),
        }
    }
}

/// x = k * pi/2 + r with |r| <= pi/4; returns (r, k mod 4).
fn reduce_pi_2(x: Dd) -> (Dd, i64) {
    let k = (x.hi / DD_FRAC_PI_2.hi).round();
    if k == 0.0 {
        return (x, 0);
    }
    let r = x - DD_FRAC_PI_2 * Dd::from_f64(k);
    (r, (k as i64).rem_euclid(4))
}

fn sin_taylor(x: Dd) -> Dd {
    // sin x = x - x^3/3! + x^5/5! - ...
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 1usize; // current odd factorial index
    loop {
        k += 2;
        term = term * x2;
        let c = INV_FACT[k - 2];
        let t = term * Dd { hi: c.0, lo: c.1 };
        sum = if k % 4 == 3 { sum - t } else { sum + t };
        if t.hi.abs() < 1e-35 * sum.hi.abs().max(1e-300) || k >= 33 {
            break;
        }
    }
    sum
}

fn cos_taylor(x: Dd) -> Dd {
    let x2 = x * x;
    let mut term = Dd::from_f64(1.0);
    let mut sum = Dd::from_f64(1.0);
    let mut k = 0usize; // current even factorial index
    loop {
        k += 2;
        term = term * x2;
        let c = INV_FACT[k - 2];
        let t = term * Dd { hi: c.0, lo: c.1 };
        sum = if k % 4 == 2 { sum - t } else { sum + t };
        if t.hi.abs() < 1e-35 * sum.hi.abs().max(1e-300) || k >= 32 {
            break;
        }
    }
    sum
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from_f64(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, o: &Dd) -> Option<std::cmp::Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(std::cmp::Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            other => other,
        }
    }
}
