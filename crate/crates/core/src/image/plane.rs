//! Single- and three-channel image containers.

use crate::real::Real;

/// Row-major single-channel image.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagePlane<S> {
    width: usize,
    height: usize,
    data: Vec<S>,
}

impl<S: Real> ImagePlane<S> {
    /// Wraps row-major samples. Panics if `data.len() != width * height` or
    /// either dimension is zero.
    pub fn new(width: usize, height: usize, data: Vec<S>) -> Self {
        assert!(width > 0 && height > 0, "plane dimensions must be nonzero");
        assert_eq!(data.len(), width * height, "sample count mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn constant(width: usize, height: usize, value: S) -> Self {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::constant(width, height, S::zero())
    }

    /// Builds a plane by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn same_dims(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> S {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: S) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[S] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    #[inline]
    pub fn row_mut(&mut self, y: usize) -> &mut [S] {
        &mut self.data[y * self.width..(y + 1) * self.width]
    }

    #[inline]
    pub fn data(&self) -> &[S] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    /// Elementwise map preserving dimensions.
    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination of two same-sized planes.
    pub fn zip_map(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        assert!(self.same_dims(other), "plane dimensions differ");
        Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Converts samples to another scalar type.
    pub fn cast<T: Real>(&self) -> ImagePlane<T> {
        ImagePlane {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|v| T::from(*v).expect("scalar conversion"))
                .collect(),
        }
    }

    /// Largest absolute difference against another same-sized plane.
    pub fn max_abs_diff(&self, other: &Self) -> S {
        assert!(self.same_dims(other), "plane dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(S::zero(), S::max)
    }
}

/// Three-channel image; all planes share dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageRgb<S> {
    planes: [ImagePlane<S>; 3],
}

impl<S: Real> ImageRgb<S> {
    pub fn new(r: ImagePlane<S>, g: ImagePlane<S>, b: ImagePlane<S>) -> Self {
        assert!(
            r.same_dims(&g) && g.same_dims(&b),
            "channel dimensions differ"
        );
        Self { planes: [r, g, b] }
    }

    pub fn constant(width: usize, height: usize, value: S) -> Self {
        let p = ImagePlane::constant(width, height, value);
        Self {
            planes: [p.clone(), p.clone(), p],
        }
    }

    /// Replicates one plane into all three channels.
    pub fn splat(plane: ImagePlane<S>) -> Self {
        Self {
            planes: [plane.clone(), plane.clone(), plane],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.planes[0].width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.planes[0].height()
    }

    #[inline]
    pub fn r(&self) -> &ImagePlane<S> {
        &self.planes[0]
    }

    #[inline]
    pub fn g(&self) -> &ImagePlane<S> {
        &self.planes[1]
    }

    #[inline]
    pub fn b(&self) -> &ImagePlane<S> {
        &self.planes[2]
    }

    #[inline]
    pub fn channel(&self, c: usize) -> &ImagePlane<S> {
        &self.planes[c]
    }

    #[inline]
    pub fn channel_mut(&mut self, c: usize) -> &mut ImagePlane<S> {
        &mut self.planes[c]
    }

    #[inline]
    pub fn channels(&self) -> &[ImagePlane<S>; 3] {
        &self.planes
    }

    pub fn same_dims(&self, other: &Self) -> bool {
        self.planes[0].same_dims(&other.planes[0])
    }

    /// Per-channel elementwise map.
    pub fn map(&self, f: impl Fn(S) -> S + Copy) -> Self {
        Self {
            planes: [
                self.planes[0].map(f),
                self.planes[1].map(f),
                self.planes[2].map(f),
            ],
        }
    }

    /// Per-channel elementwise combination.
    pub fn zip_map(&self, other: &Self, f: impl Fn(S, S) -> S + Copy) -> Self {
        Self::new(
            self.planes[0].zip_map(&other.planes[0], f),
            self.planes[1].zip_map(&other.planes[1], f),
            self.planes[2].zip_map(&other.planes[2], f),
        )
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        self.planes
            .iter()
            .zip(&other.planes)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(S::zero(), S::max)
    }
}
