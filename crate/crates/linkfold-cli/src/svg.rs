//! Deterministic SVG rendering of linkage frames: one document per frame,
//! a shared viewBox covering every frame plus a 5% margin, vertices as
//! dots and edges as a polyline or polygon.

use linkfold::geom::Point;

pub struct SvgOptions {
    /// Close the vertex chain into a polygon.
    pub closed: bool,
    /// Render every k-th frame.
    pub stride: usize,
    /// Pixel width of the output; height follows the aspect ratio.
    pub width: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { closed: false, stride: 1, width: 480.0 }
    }
}

const MARGIN_FRAC: f64 = 0.05;

fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

/// Render ceil(frames / stride) SVG documents with a common viewBox.
pub fn render_svg(frames: &[Vec<Point>], opts: &SvgOptions) -> Vec<String> {
    if frames.is_empty() {
        return Vec::new();
    }
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for frame in frames {
        for v in frame {
            min.x = min.x.min(v.x);
            min.y = min.y.min(v.y);
            max.x = max.x.max(v.x);
            max.y = max.y.max(v.y);
        }
    }
    let span_x = (max.x - min.x).max(1e-9);
    let span_y = (max.y - min.y).max(1e-9);
    let margin = MARGIN_FRAC * span_x.max(span_y);
    let width = span_x + 2.0 * margin;
    let height = span_y + 2.0 * margin;
    let scale = opts.width / width;
    let px_h = height * scale;
    let dot_r = 0.012 * width.max(height) * scale;
    let stroke = 0.006 * width.max(height) * scale;

    // Map plane coordinates to pixels, flipping y so up stays up.
    let map = |v: Point| -> (f64, f64) {
        (
            (v.x - min.x + margin) * scale,
            (max.y - v.y + margin) * scale,
        )
    };

    frames
        .iter()
        .step_by(opts.stride.max(1))
        .map(|frame| {
            let mut svg = String::with_capacity(1024);
            svg.push_str(&format!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
                 width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
                fmt(opts.width),
                fmt(px_h),
                fmt(opts.width),
                fmt(px_h)
            ));
            let pts: Vec<String> = frame
                .iter()
                .map(|&v| {
                    let (x, y) = map(v);
                    format!("{},{}", fmt(x), fmt(y))
                })
                .collect();
            let tag = if opts.closed { "polygon" } else { "polyline" };
            svg.push_str(&format!(
                "  <{tag} points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{}\"/>\n",
                pts.join(" "),
                fmt(stroke)
            ));
            for &v in frame {
                let (x, y) = map(v);
                svg.push_str(&format!(
                    "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"black\"/>\n",
                    fmt(x),
                    fmt(y),
                    fmt(dot_r)
                ));
            }
            svg.push_str("</svg>\n");
            svg
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn one_frame_yields_one_document() {
        let docs = render_svg(&[square()], &SvgOptions::default());
        assert_eq!(docs.len(), 1);
        assert!(docs[0].starts_with("<svg"));
        assert!(docs[0].contains("polyline"));
    }

    #[test]
    fn closed_frames_use_polygon() {
        let opts = SvgOptions { closed: true, ..Default::default() };
        let docs = render_svg(&[square()], &opts);
        assert!(docs[0].contains("polygon"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let frames = vec![square(), square().into_iter().map(|p| p * 1.5).collect()];
        let a = render_svg(&frames, &SvgOptions::default());
        let b = render_svg(&frames, &SvgOptions::default());
        assert_eq!(a, b);
    }

    #[test]
    fn stride_controls_frame_count() {
        let frames: Vec<Vec<Point>> = (0..10)
            .map(|k| square().into_iter().map(|p| p * (1.0 + 0.1 * k as f64)).collect())
            .collect();
        for stride in 1..=4 {
            let opts = SvgOptions { stride, ..Default::default() };
            let docs = render_svg(&frames, &opts);
            assert_eq!(docs.len(), frames.len().div_ceil(stride), "stride {stride}");
        }
    }
}
