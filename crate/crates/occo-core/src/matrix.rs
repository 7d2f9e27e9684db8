//! Minimal row-major dense matrix with the handful of kernels the network
//! needs. Loop orders keep the innermost stride unit-length so the compiler
//! can vectorize.

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn iter_all(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }

    /// y = x · w + b (broadcast b over rows). x: n×in, w: in×out, b: out.
    pub fn affine(x: &Matrix, w: &Matrix, b: &[f64]) -> Matrix {
        assert_eq!(x.cols, w.rows, "affine: inner dims");
        assert_eq!(w.cols, b.len(), "affine: bias dim");
        let mut y = Matrix::zeros(x.rows, w.cols);
        for i in 0..x.rows {
            let yi = &mut y.data[i * w.cols..(i + 1) * w.cols];
            yi.copy_from_slice(b);
            let xi = &x.data[i * x.cols..(i + 1) * x.cols];
            for (k, &xik) in xi.iter().enumerate() {
                let wk = &w.data[k * w.cols..(k + 1) * w.cols];
                for (yij, &wkj) in yi.iter_mut().zip(wk) {
                    *yij += xik * wkj;
                }
            }
        }
        y
    }

    /// dW = xᵀ · dy. x: n×in, dy: n×out → in×out.
    pub fn grad_weights(x: &Matrix, dy: &Matrix) -> Matrix {
        assert_eq!(x.rows, dy.rows, "grad_weights: row counts");
        let mut dw = Matrix::zeros(x.cols, dy.cols);
        for i in 0..x.rows {
            let xi = &x.data[i * x.cols..(i + 1) * x.cols];
            let di = &dy.data[i * dy.cols..(i + 1) * dy.cols];
            for (k, &xik) in xi.iter().enumerate() {
                let dwk = &mut dw.data[k * dy.cols..(k + 1) * dy.cols];
                for (dwkj, &dij) in dwk.iter_mut().zip(di) {
                    *dwkj += xik * dij;
                }
            }
        }
        dw
    }

    /// db = column sums of dy.
    pub fn grad_bias(dy: &Matrix) -> Vec<f64> {
        let mut db = vec![0.0; dy.cols];
        for i in 0..dy.rows {
            for (dbj, &dij) in db.iter_mut().zip(dy.row(i)) {
                *dbj += dij;
            }
        }
        db
    }

    /// dx = dy · wᵀ. dy: n×out, w: in×out → n×in.
    pub fn grad_input(dy: &Matrix, w: &Matrix) -> Matrix {
        assert_eq!(dy.cols, w.cols, "grad_input: out dims");
        let mut dx = Matrix::zeros(dy.rows, w.rows);
        for i in 0..dy.rows {
            let di = &dy.data[i * dy.cols..(i + 1) * dy.cols];
            let xi = &mut dx.data[i * w.rows..(i + 1) * w.rows];
            for (k, xik) in xi.iter_mut().enumerate() {
                let wk = &w.data[k * w.cols..(k + 1) * w.cols];
                let mut acc = 0.0;
                for (&dij, &wkj) in di.iter().zip(wk) {
                    acc += dij * wkj;
                }
                *xik = acc;
            }
        }
        dx
    }

    /// In-place ReLU; returns self for chaining.
    pub fn relu_inplace(mut self) -> Matrix {
        for v in &mut self.data {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        self
    }

    /// Zero entries of d where the forward activation was not positive.
    pub fn relu_backward_inplace(d: &mut Matrix, activated: &Matrix) {
        assert_eq!(d.data.len(), activated.data.len());
        for (dv, &av) in d.data.iter_mut().zip(&activated.data) {
            if av <= 0.0 {
                *dv = 0.0;
            }
        }
    }
}
