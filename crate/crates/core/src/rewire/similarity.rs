use crate::matrix::{dot, norm, Matrix};
use crate::Real;

use super::UserCodes;

/// Pairwise cosine similarity over encoder outputs. Rows with zero norm
/// have similarity 0 with everyone.
#[derive(Clone, Debug)]
pub struct CosineSimilarity {
    unit: Matrix,
}

impl CosineSimilarity {
    pub fn new(z: &Matrix) -> Self {
        let mut unit = z.clone();
        for i in 0..unit.rows() {
            let row = unit.row_mut(i);
            let n = norm(row);
            if n > 0.0 {
                row.iter_mut().for_each(|x| *x /= n);
            }
        }
        CosineSimilarity { unit }
    }

    pub fn num_users(&self) -> usize {
        self.unit.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Real {
        dot(self.unit.row(i), self.unit.row(j))
    }

    /// Unit-normalized rows (zero rows stay zero).
    pub fn unit_rows(&self) -> &Matrix {
        &self.unit
    }
}

pub fn pairwise_cosine(codes: &UserCodes) -> CosineSimilarity {
    CosineSimilarity::new(&codes.z)
}
