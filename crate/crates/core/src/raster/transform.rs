use super::image::{FloorPlanImage, ImageFrame, OCCUPANCY};
use crate::geometry::Point;

/// Nearest-neighbor resampling of `img` into `frame`; pixels that map
/// outside the source are zero.
pub fn resample(img: &FloorPlanImage, frame: ImageFrame) -> FloorPlanImage {
    let mut out = FloorPlanImage::zeros(frame, img.num_categories());
    let src = img.frame;
    let n_src = src.num_pixels();
    let n_dst = frame.num_pixels();
    let res_src = src.resolution as f64;
    let channels = img.num_channels();
    let raw = img.raw();
    let data = out.raw_mut();
    for row in 0..frame.resolution {
        for col in 0..frame.resolution {
            let [u, v] = src.world_to_pixel(frame.pixel_center_world(col, row));
            let (u, v) = (u.floor(), v.floor());
            if u < 0.0 || v < 0.0 || u >= res_src || v >= res_src {
                continue;
            }
            let si = src.index(u as usize, v as usize);
            let di = frame.index(col, row);
            for ch in 0..channels {
                data[ch * n_dst + di] = raw[ch * n_src + si];
            }
        }
    }
    out
}

/// Shifts the image so that world point `p` sits at the image center.
pub fn recenter(img: &FloorPlanImage, p: Point) -> FloorPlanImage {
    let frame = ImageFrame { center: p, ..img.frame };
    resample(img, frame)
}

/// Rotates the image content by `-theta` about its center, so that a
/// direction at angle `theta` in the world points along the image's +u
/// axis. Occupant orientations are re-expressed relative to the new axes.
pub fn rotate(img: &FloorPlanImage, theta: f64) -> FloorPlanImage {
    let frame = ImageFrame {
        angle: img.frame.angle + theta,
        ..img.frame
    };
    let mut out = resample(img, frame);
    let (st, ct) = theta.sin_cos();
    let n = frame.num_pixels();
    let (sin_ch, cos_ch) = (out.sin_channel(), out.cos_channel());
    let data = out.raw_mut();
    for i in 0..n {
        if data[OCCUPANCY * n + i] == 0.0 {
            continue;
        }
        let s = data[sin_ch * n + i] as f64;
        let c = data[cos_ch * n + i] as f64;
        data[sin_ch * n + i] = (s * ct - c * st) as f32;
        data[cos_ch * n + i] = (c * ct + s * st) as f32;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::image::{render, RasterConfig, CATEGORY_BASE, FLOOR};
    use crate::rng::seeded;
    use crate::scene::{ParentId, Room, Scene, SceneObject};
    use rand::Rng;
    use std::f64::consts::PI;

    fn scene() -> Scene {
        let mut s = Scene::empty(Room::rectangle(4.6, 3.7, "bedroom"));
        for (i, (pos, theta)) in [([1.0, 1.2], 0.3), ([3.2, 2.5], 2.0), ([2.0, 3.0], 4.0)].into_iter().enumerate() {
            s.objects.push(SceneObject {
                id: i as u32,
                category_id: i % 2,
                position: pos,
                base_height: 0.0,
                theta,
                dims: [0.9, 0.5],
                height: 0.8,
                model_id: "m".into(),
                parent_id: ParentId::Floor,
            });
        }
        s
    }

    fn image() -> FloorPlanImage {
        render(&scene(), 2, &RasterConfig::default()).unwrap()
    }

    #[test]
    fn recenter_on_center_is_identity() {
        let img = image();
        assert_eq!(recenter(&img, img.frame.center), img);
    }

    #[test]
    fn one_pixel_shift() {
        let img = image();
        let mpp = img.meters_per_pixel();
        let c = img.frame.center;
        let shifted = recenter(&img, [c[0] + mpp, c[1]]);
        let r = img.resolution();
        for ch in 0..img.num_channels() {
            for row in 0..r {
                for col in 0..r - 1 {
                    assert_eq!(shifted.get(ch, col, row), img.get(ch, col + 1, row));
                }
                assert_eq!(shifted.get(ch, r - 1, row), 0.0);
            }
        }
    }

    #[test]
    fn recenter_round_trip_on_kept_region() {
        let img = image();
        let mpp = img.meters_per_pixel();
        let c = img.frame.center;
        let there = recenter(&img, [c[0] + 5.0 * mpp, c[1] - 3.0 * mpp]);
        let back = recenter(&there, c);
        let r = img.resolution();
        for ch in 0..img.num_channels() {
            for row in 3..r {
                for col in 0..r - 5 {
                    assert_eq!(back.get(ch, col, row), img.get(ch, col, row));
                }
            }
        }
    }

    #[test]
    fn zero_rotation_is_identity() {
        let img = image();
        assert_eq!(rotate(&img, 0.0), img);
    }

    #[test]
    fn half_turn_twice_is_identity() {
        let img = image();
        let twice = rotate(&rotate(&img, PI), PI);
        for ch in 0..img.num_channels() {
            for (a, b) in twice.channel(ch).iter().zip(img.channel(ch)) {
                assert!((a - b).abs() < 1e-6, "channel {ch}");
            }
        }
        for ch in FLOOR..CATEGORY_BASE + 2 {
            assert_eq!(twice.channel(ch), img.channel(ch));
        }
    }

    #[test]
    fn rotation_round_trip_agreement() {
        let img = image();
        let mut rng = seeded(17);
        for _ in 0..20 {
            let theta = rng.random_range(0.0..2.0 * PI);
            let back = rotate(&rotate(&img, theta), -theta);
            // compare pixels whose center stays inside the disc that survives
            // any rotation
            let r = img.resolution();
            let half = r as f64 / 2.0;
            let (mut agree, mut total) = (0usize, 0usize);
            for row in 0..r {
                for col in 0..r {
                    let (dx, dy) = (col as f64 + 0.5 - half, row as f64 + 0.5 - half);
                    if dx.hypot(dy) > half - 1.0 {
                        continue;
                    }
                    total += 1;
                    let same = (0..CATEGORY_BASE + 2).all(|ch| back.get(ch, col, row) == img.get(ch, col, row));
                    agree += same as usize;
                }
            }
            assert!(agree as f64 >= 0.95 * total as f64, "theta {theta}: {agree}/{total}");
        }
    }

    #[test]
    fn rotation_reexpresses_orientation() {
        let img = image();
        let obj = &scene().objects[0];
        let rotated = rotate(&img, obj.theta);
        let (col, row) = rotated.frame.pixel_of(obj.position).unwrap();
        assert!((rotated.get(rotated.sin_channel(), col, row)).abs() < 1e-6);
        assert!((rotated.get(rotated.cos_channel(), col, row) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn shape_preserved() {
        let img = image();
        let r = rotate(&recenter(&img, [1.0, 1.0]), 0.4);
        assert_eq!(r.num_channels(), img.num_channels());
        assert_eq!(r.resolution(), img.resolution());
    }
}
