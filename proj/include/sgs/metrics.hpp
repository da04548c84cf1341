#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

#include "sgs/tensor.hpp"

namespace sgs {

/// Single-channel image, row-major.
struct GrayImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> pixels;

    double at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }
};

/// [1|3, H, W] or [1, 1|3, H, W] tensor to luminance (ITU-R 601 weights for colour).
GrayImage to_gray(const Tensor& image);

struct SsimOptions {
    std::size_t window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

/// Mean SSIM over all fully-contained Gaussian windows.
double ssim(const GrayImage& x, const GrayImage& y, const SsimOptions& options = {});

struct FsimOptions {
    std::size_t scales = 4;
    std::size_t orientations = 4;
    double min_wavelength = 6.0;
    double mult = 2.0;
    double sigma_on_f = 0.55;
    double d_theta_on_sigma = 1.2;
    double noise_k = 2.0;
    double t1 = 0.85;
    double t2 = 160.0;
};

/// Phase congruency map (log-Gabor bank) of an image on a 0..255 scale.
GrayImage phase_congruency(const GrayImage& image, const FsimOptions& options = {});

/// Grayscale FSIM of two images with values in [0, 1].
double fsim(const GrayImage& x, const GrayImage& y, const FsimOptions& options = {});

/// Fréchet distance between Gaussians with the given moments.
double frechet_from_stats(const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a, const Eigen::VectorXd& mean_b,
                          const Eigen::MatrixXd& cov_b);

/// Fréchet distance between Gaussians fitted to the rows of two feature
/// matrices (unbiased covariance). Needs at least two rows each.
double frechet_distance(const Eigen::MatrixXd& feats_a, const Eigen::MatrixXd& feats_b);

struct MetricReport {
    std::vector<std::string> ids;
    std::vector<double> ssim;
    std::vector<double> fsim;
    double ssim_mean = 0.0;
    double fsim_mean = 0.0;
    double frechet_proxy = 0.0;
    std::size_t n = 0;
    SsimOptions ssim_options;
    FsimOptions fsim_options;

    /// {"ssim_mean", "fsim_mean", "frechet_proxy", "n", "constants"}.
    std::string summary_json() const;
    /// id,ssim,fsim rows.
    std::string per_sample_csv() const;
};

}  // namespace sgs
