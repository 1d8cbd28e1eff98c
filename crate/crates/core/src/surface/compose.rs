use rayon::prelude::*;

use crate::logcentric::{GridSpec, Heightmap};
use crate::Result;

use super::{gabor_grain, BaseShape, GrainConfig, SurfaceKnot, ThicknessModel};

/// Everything needed to render a surface heightmap.
#[derive(Debug, Clone, Default)]
pub struct SurfaceLayers<'a> {
    pub base: Option<&'a BaseShape>,
    /// Replaces the mean-radius band of `base` when present.
    pub thickness: Option<&'a ThicknessModel>,
    pub knots: &'a [SurfaceKnot],
    /// Grain settings and the reference radius of the unrolled surface.
    pub grain: Option<(&'a GrainConfig, f64)>,
}

/// Renders the smooth shape, adds knot bumps and grain, and checks that every
/// cell stays physical.
pub fn compose_heightmap(grid: &GridSpec, layers: &SurfaceLayers<'_>) -> Result<Heightmap> {
    grid.validate()?;
    if let Some(b) = layers.base {
        b.validate()?;
    }
    if let Some(t) = layers.thickness {
        t.validate()?;
    }
    let widths = layers.knots.iter().map(|k| k.widths()).collect::<Result<Vec<_>>>()?;

    let rows: Vec<Vec<f64>> = (0..grid.n_l)
        .into_par_iter()
        .map(|r| {
            let l = grid.l(r);
            let mut row = match layers.base {
                Some(b) => b.row(l, grid.n_theta, layers.thickness.is_none()),
                None => vec![0.0; grid.n_theta],
            };
            if let Some(t) = layers.thickness {
                let v = t.eval(l);
                row.iter_mut().for_each(|x| *x += v);
            }
            for (k, w) in layers.knots.iter().zip(&widths) {
                let (_, half_l) = k.footprint(w);
                if (l - k.l).abs() >= half_l {
                    continue;
                }
                for (c, x) in row.iter_mut().enumerate() {
                    *x += k.height_at(w, grid.theta(c), l);
                }
            }
            row
        })
        .collect();
    let mut h = Heightmap::from_values(*grid, rows.concat())?;
    if let Some((cfg, radius)) = layers.grain {
        if cfg.amplitude > 0.0 {
            let g = gabor_grain(grid, cfg, radius)?;
            h.values.iter_mut().zip(&g.values).for_each(|(a, b)| *a += b);
        }
    }
    h.check_physical()?;
    Ok(h)
}
