//! Conversions between the f64 image planes used by the filter/metrics
//! side and the batched tensors the network consumes.

use crate::image::{ImagePlane, ImageRgb};
use crate::nn::Tensor;
use crate::real::Real;

/// Stacks RGB images into an (n, 3, h, w) tensor. All images must share
/// dimensions; values are narrowed to the training scalar.
pub fn images_to_tensor<S: Real>(images: &[&ImageRgb<f64>]) -> Tensor<S> {
    assert!(!images.is_empty(), "cannot build a tensor from no images");
    let (w, h) = (images[0].width(), images[0].height());
    let mut t = Tensor::zeros(images.len(), 3, h, w);
    for (b, img) in images.iter().enumerate() {
        assert!(
            img.width() == w && img.height() == h,
            "batch images must share dimensions"
        );
        for ch in 0..3 {
            let plane = t.plane_mut(b, ch);
            for (dst, src) in plane.iter_mut().zip(img.channel(ch).data()) {
                *dst = S::lit(*src);
            }
        }
    }
    t
}

/// Extracts one sample of an (n, 3, h, w) tensor as an f64 RGB image.
pub fn tensor_sample_to_rgb<S: Real>(t: &Tensor<S>, b: usize) -> ImageRgb<f64> {
    assert_eq!(t.c(), 3, "expected a 3-channel tensor");
    let (w, h) = (t.w(), t.h());
    let plane = |ch: usize| {
        let src = t.plane(b, ch);
        let mut out = ImagePlane::zeros(w, h);
        for (dst, v) in out.data_mut().iter_mut().zip(src) {
            *dst = v.to_f64_lossy();
        }
        out
    };
    ImageRgb::new(plane(0), plane(1), plane(2))
}
