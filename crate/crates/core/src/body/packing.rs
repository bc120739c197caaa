use serde::{Deserialize, Serialize};

use crate::body::ConvexBodyModel;
use crate::error::{Error, Result};
use crate::geometry::dist;
use crate::rng::Stream;

/// Centers of pairwise disjoint caps sharing one height.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapPacking {
    pub height: f64,
    pub centers: Vec<Vec<f64>>,
    /// Minimum center separation that certifies disjointness at `height`.
    pub separation: f64,
}

const POOL_FACTOR: usize = 100;
const BISECTION_RATIO: f64 = 1.01;
/// Lowest height tried, relative to the diameter.
const HEIGHT_FLOOR: f64 = 1e-18;

/// Each cap of height `h` lies in the metric ball of radius
/// `sqrt(2 r_out h) + h` about its center, so centers further apart than
/// twice that radius carry disjoint caps.
pub fn separation_for_height(r_out: f64, h: f64) -> f64 {
    2.0 * ((2.0 * r_out * h).sqrt() + h)
}

/// Greedy farthest-point packing of at least `n` disjoint caps of a common
/// height, chosen by bisection as the largest height (to 1%) that admits `n`
/// centers from a pool of `100·n` uniform boundary samples.
pub fn pack_disjoint_caps(body: &ConvexBodyModel, n: usize, rng: &mut Stream) -> Result<CapPacking> {
    if n == 0 {
        return Err(Error::invalid("need at least one cap"));
    }
    let d = body.dim();
    let pool_n = POOL_FACTOR * n;
    let pool = body.sample_flat(rng, pool_n);
    let at = |i: usize| &pool[i * d..(i + 1) * d];

    // Farthest-point traversal; insertion radii are nonincreasing.
    let mut order = vec![0usize];
    let mut radii = vec![f64::INFINITY];
    let mut mind: Vec<f64> = (0..pool_n).map(|i| dist(at(i), at(0))).collect();
    while order.len() < n {
        let (best, &r) = mind
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("pool is nonempty");
        if r <= 0.0 {
            return Err(Error::Capacity(format!("sample pool exhausted after {} centers", order.len())));
        }
        order.push(best);
        radii.push(r);
        let p = at(best);
        for (i, m) in mind.iter_mut().enumerate() {
            let v = dist(at(i), p);
            if v < *m {
                *m = v;
            }
        }
    }

    let r_out = body.blaschke_radii().r_out;
    let count = |h: f64| radii.iter().filter(|&&r| r > separation_for_height(r_out, h)).count();
    let mut hi = body.diameter();
    let height = if count(hi) >= n {
        hi
    } else {
        let mut lo = hi * HEIGHT_FLOOR;
        if count(lo) < n {
            return Err(Error::Capacity(format!(
                "no cap height above {lo:e} admits {n} disjoint caps"
            )));
        }
        while hi / lo > BISECTION_RATIO {
            let mid = (lo * hi).sqrt();
            if count(mid) >= n {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let m = count(height);
    let centers = order[..m].iter().map(|&i| at(i).to_vec()).collect();
    Ok(CapPacking {
        height,
        centers,
        separation: separation_for_height(r_out, height),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cap_has_full_height() {
        let b = ConvexBodyModel::unit_ball(3);
        let mut rng = Stream::new(5);
        let p = pack_disjoint_caps(&b, 1, &mut rng).unwrap();
        assert_eq!(p.centers.len(), 1);
        assert_eq!(p.height, b.diameter());
    }

    #[test]
    fn centers_are_separated() {
        let b = ConvexBodyModel::ellipsoid(vec![1.5, 1.0, 0.8]).unwrap();
        let mut rng = Stream::new(9);
        let p = pack_disjoint_caps(&b, 30, &mut rng).unwrap();
        assert!(p.centers.len() >= 30);
        for i in 0..p.centers.len() {
            for j in i + 1..p.centers.len() {
                assert!(dist(&p.centers[i], &p.centers[j]) > p.separation);
            }
        }
    }

    #[test]
    fn zero_caps_rejected() {
        let b = ConvexBodyModel::unit_ball(3);
        assert!(pack_disjoint_caps(&b, 0, &mut Stream::new(0)).is_err());
    }
}
