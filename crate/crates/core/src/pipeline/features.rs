//! Feature vectors for a pair of quadrilateral blocks.
//!
//! Layout (18 values): the four vertices of block `a` as `x, y` pairs in
//! canonical order, the area of `a`, then the same nine values for `b`.

use super::PipelineError;
use crate::geometry::{Block, Point};

pub const FEATURE_DIM: usize = 18;
/// Gravity-center features: `(x_a, y_a, x_b, y_b)`.
pub const GRAVITY_DIM: usize = 4;

const PER_BLOCK: usize = 9;

fn quad(block: &Block) -> Result<(), PipelineError> {
    if block.len() != 4 {
        return Err(PipelineError::WrongVertexCount { block: block.id(), count: block.len() });
    }
    Ok(())
}

pub fn extract_features(a: &Block, b: &Block) -> Result<Vec<f64>, PipelineError> {
    quad(a)?;
    quad(b)?;
    let mut out = Vec::with_capacity(FEATURE_DIM);
    for block in [a, b] {
        for p in block.vertices() {
            out.push(p.x);
            out.push(p.y);
        }
        out.push(block.area());
    }
    Ok(out)
}

fn check_len(features: &[f64]) -> Result<(), PipelineError> {
    if features.len() != FEATURE_DIM {
        return Err(PipelineError::FeatureLength { expected: FEATURE_DIM, got: features.len() });
    }
    Ok(())
}

/// Rebuild both blocks (ids 0 and 1) from a feature vector. Area entries
/// are ignored.
pub fn blocks_from_features(features: &[f64]) -> Result<(Block, Block), PipelineError> {
    check_len(features)?;
    let block = |id: i64, chunk: &[f64]| {
        let vertices: Vec<Point> = chunk[..8].chunks(2).map(|c| Point::new(c[0], c[1])).collect();
        Block::new(id, vertices)
    };
    Ok((block(0, &features[..PER_BLOCK])?, block(1, &features[PER_BLOCK..])?))
}

/// Centers of gravity of both blocks, `[x_a, y_a, x_b, y_b]`.
pub fn gravity_features(features: &[f64]) -> Result<Vec<f64>, PipelineError> {
    let (a, b) = blocks_from_features(features)?;
    let (ca, cb) = (a.centroid(), b.centroid());
    Ok(vec![ca.x, ca.y, cb.x, cb.y])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn direct_read_out() {
        let a = Block::rectangle(0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let b = Block::rectangle(1, 2.0, 0.0, 4.0, 1.0).unwrap();
        let f = extract_features(&a, &b).unwrap();
        assert_eq!(f, vec![0., 0., 1., 0., 1., 1., 0., 1., 1., 2., 0., 4., 0., 4., 1., 2., 1., 2.]);
        let swapped = extract_features(&b, &a).unwrap();
        assert_eq!(&swapped[..9], &f[9..]);
        assert_eq!(&swapped[9..], &f[..9]);
    }

    #[test]
    fn translation_moves_coordinates_not_areas() {
        let a = Block::rectangle(0, 0.0, 0.0, 1.0, 2.0).unwrap();
        let b = Block::rectangle(1, 3.0, 1.0, 4.0, 1.5).unwrap();
        let off = Point::new(2.5, -1.0);
        let f0 = extract_features(&a, &b).unwrap();
        let f1 = extract_features(&a.translated(off), &b.translated(off)).unwrap();
        for (k, (u, v)) in f0.iter().zip(&f1).enumerate() {
            match k % 9 {
                8 => assert_eq!(u, v),
                i if i % 2 == 0 => assert!((v - u - 2.5).abs() < 1e-12),
                _ => assert!((v - u + 1.0).abs() < 1e-12),
            }
        }
    }

    #[test]
    fn non_quadrilateral_rejected() {
        let tri = Block::new(9, vec![Point::new(0., 0.), Point::new(1., 0.), Point::new(0., 1.)]).unwrap();
        let sq = Block::rectangle(0, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(extract_features(&sq, &tri), Err(PipelineError::WrongVertexCount { block: 9, count: 3 })));
    }

    #[test]
    fn features_round_trip_to_blocks() {
        let a = Block::rectangle(0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let b = Block::rectangle(1, 1.0, 0.0, 3.0, 1.0).unwrap();
        let f = extract_features(&a, &b).unwrap();
        let (ra, rb) = blocks_from_features(&f).unwrap();
        assert_eq!((ra, rb), (a, b));
        assert_eq!(gravity_features(&f).unwrap(), vec![0.5, 0.5, 2.0, 0.5]);
        assert!(blocks_from_features(&f[..17]).is_err());
    }
}
