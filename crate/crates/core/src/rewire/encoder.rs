use crate::graph::InteractionGraph;
use crate::matrix::Matrix;
use crate::sparse::Csr;

/// Encoder output: one row per user, built from interactions only.
#[derive(Clone, Debug, PartialEq)]
pub struct UserCodes {
    pub z: Matrix,
    pub layers: usize,
}

/// Parameter-free interaction encoder.
///
/// Each layer is a user-domain convolution with weights
/// `1/sqrt(|N_u| |N_v|)`; between user layers the item side is refreshed
/// with the transposed operator. With `L` layers the output is
/// `Z = A (A^T A)^(L-1) Q0`.
#[derive(Clone, Debug)]
pub struct Encoder {
    adj: Csr,
    adj_t: Csr,
    layers: usize,
}

impl Encoder {
    pub fn new(interactions: &InteractionGraph, layers: usize) -> Self {
        assert!(layers >= 1, "encoder needs at least one layer");
        let adj = interactions.train_matrix().sym_normalized();
        Encoder {
            adj_t: adj.transpose(),
            adj,
            layers,
        }
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn encode(&self, items0: &Matrix) -> UserCodes {
        let mut z = self.adj.mul_dense(items0);
        for _ in 1..self.layers {
            let q = self.adj_t.mul_dense(&z);
            z = self.adj.mul_dense(&q);
        }
        UserCodes {
            z,
            layers: self.layers,
        }
    }

    /// Gradient w.r.t. the item table given a gradient w.r.t. `Z`.
    pub fn backward(&self, grad_z: &Matrix) -> Matrix {
        let mut g_items = self.adj_t.mul_dense(grad_z);
        for _ in 1..self.layers {
            let g_users = self.adj.mul_dense(&g_items);
            g_items = self.adj_t.mul_dense(&g_users);
        }
        g_items
    }
}

/// Encoder forward pass as a free function.
pub fn encode_users(interactions: &InteractionGraph, items0: &Matrix, layers: usize) -> UserCodes {
    Encoder::new(interactions, layers).encode(items0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::dot;

    // user 0 -> items a(0), b(1); user 1 -> item b; user 2 isolated
    fn toy() -> InteractionGraph {
        InteractionGraph::from_edges(3, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)]).unwrap()
    }

    #[test]
    fn one_layer_hand_value() {
        let q = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let z = encode_users(&toy(), &q, 1).z;
        assert!((z[(0, 0)] as f64 - 1.0 / 2f64.sqrt()).abs() < crate::ROUNDING);
        assert!((z[(0, 1)] as f64 - 1.0).abs() < crate::ROUNDING);
        assert_eq!(z.row(2), &[0.0, 0.0]);
    }

    #[test]
    fn isolated_user_stays_zero_with_depth() {
        let q = Matrix::from_rows(&[vec![0.3, -1.0], vec![2.0, 0.5]]);
        let z = encode_users(&toy(), &q, 3).z;
        assert_eq!(z.row(2), &[0.0, 0.0]);
        assert!(z.row(0).iter().any(|&x| x != 0.0));
    }

    #[test]
    fn linear_in_item_table() {
        let q = Matrix::from_rows(&[vec![0.3, -1.0], vec![2.0, 0.5]]);
        let z = encode_users(&toy(), &q, 1).z;
        let z2 = encode_users(&toy(), &q.scaled(3.0), 1).z;
        assert!((z.scaled(3.0).max_abs_diff(&z2) as f64) < crate::ROUNDING);
    }

    #[test]
    fn backward_is_adjoint() {
        // <encode(q), g> == <q, backward(g)>
        let enc = Encoder::new(&toy(), 2);
        let q = Matrix::from_rows(&[vec![0.3, -1.0], vec![2.0, 0.5]]);
        let g = Matrix::from_rows(&[vec![1.0, 2.0], vec![-0.5, 0.25], vec![3.0, 3.0]]);
        let lhs = dot(enc.encode(&q).z.as_slice(), g.as_slice());
        let rhs = dot(q.as_slice(), enc.backward(&g).as_slice());
        assert!(((lhs - rhs) as f64).abs() < 10.0 * crate::ROUNDING);
    }
}
