#include "sgs/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "sgs/error.hpp"

namespace sgs {

namespace {

using Complex = std::complex<double>;
using ComplexGrid = std::vector<Complex>;

void require_same_size(const GrayImage& x, const GrayImage& y, const char* what) {
    if (x.height != y.height || x.width != y.width) {
        throw ShapeError(std::string(what) + ": image sizes differ (" + std::to_string(x.width) + "x" +
                         std::to_string(x.height) + " vs " + std::to_string(y.width) + "x" +
                         std::to_string(y.height) + ")");
    }
}

// In-place 2-D DFT over a row-major grid. The inverse includes the 1/(rows*cols) factor.
void fft2(ComplexGrid& grid, std::size_t rows, std::size_t cols, bool inverse) {
    Eigen::FFT<double> fft;
    std::vector<Complex> in, out;
    in.resize(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(r * cols), cols, in.begin());
        inverse ? fft.inv(out, in) : fft.fwd(out, in);
        std::copy(out.begin(), out.end(), grid.begin() + static_cast<std::ptrdiff_t>(r * cols));
    }
    in.resize(rows);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) in[r] = grid[r * cols + c];
        inverse ? fft.inv(out, in) : fft.fwd(out, in);
        for (std::size_t r = 0; r < rows; ++r) grid[r * cols + c] = out[r];
    }
}

// Normalised frequency coordinate of unshifted DFT index i (range as in the
// reference MATLAB implementation, odd and even lengths handled separately).
double freq_coord(std::size_t i, std::size_t n) {
    const std::size_t centered = (i + n / 2) % n;
    if (n % 2) return (static_cast<double>(centered) - static_cast<double>(n - 1) / 2.0) / static_cast<double>(n - 1);
    return (static_cast<double>(centered) - static_cast<double>(n) / 2.0) / static_cast<double>(n);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 3x3 'same' convolution with zero padding (kernel flipped, as conv2 does).
std::vector<double> conv3_same(const GrayImage& img, const double k[3][3]) {
    std::vector<double> out(img.pixels.size(), 0.0);
    const auto h = static_cast<std::ptrdiff_t>(img.height), w = static_cast<std::ptrdiff_t>(img.width);
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            double s = 0.0;
            for (std::ptrdiff_t a = -1; a <= 1; ++a) {
                for (std::ptrdiff_t b = -1; b <= 1; ++b) {
                    const std::ptrdiff_t yy = y - a, xx = x - b;
                    if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                    s += img.pixels[static_cast<std::size_t>(yy * w + xx)] * k[a + 1][b + 1];
                }
            }
            out[static_cast<std::size_t>(y * w + x)] = s;
        }
    }
    return out;
}

std::vector<double> gradient_magnitude(const GrayImage& img) {
    static const double dx[3][3] = {{3 / 16.0, 0, -3 / 16.0}, {10 / 16.0, 0, -10 / 16.0}, {3 / 16.0, 0, -3 / 16.0}};
    static const double dy[3][3] = {{3 / 16.0, 10 / 16.0, 3 / 16.0}, {0, 0, 0}, {-3 / 16.0, -10 / 16.0, -3 / 16.0}};
    auto gx = conv3_same(img, dx);
    auto gy = conv3_same(img, dy);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
    return gx;
}

}  // namespace

GrayImage to_gray(const Tensor& image) {
    std::size_t c, h, w, offset = 0;
    if (image.rank() == 4 && image.dim(0) == 1) {
        c = image.dim(1), h = image.dim(2), w = image.dim(3);
    } else if (image.rank() == 3) {
        c = image.dim(0), h = image.dim(1), w = image.dim(2);
    } else {
        throw ShapeError("to_gray: expected an image tensor, got " + shape_str(image.shape()));
    }
    if (c != 1 && c != 3) throw ShapeError("to_gray: expected 1 or 3 channels, got " + shape_str(image.shape()));
    GrayImage g{h, w, std::vector<double>(h * w)};
    const std::size_t hw = h * w;
    for (std::size_t i = 0; i < hw; ++i) {
        g.pixels[i] = c == 1 ? image.at(offset + i)
                             : 0.299 * image.at(i) + 0.587 * image.at(hw + i) + 0.114 * image.at(2 * hw + i);
    }
    return g;
}

double ssim(const GrayImage& x, const GrayImage& y, const SsimOptions& o) {
    require_same_size(x, y, "ssim");
    const std::size_t win = o.window;
    if (x.height < win || x.width < win) throw ShapeError("ssim: images smaller than the window");
    std::vector<double> kernel(win * win);
    const double half = static_cast<double>(win - 1) / 2.0;
    double ksum = 0.0;
    for (std::size_t i = 0; i < win; ++i) {
        for (std::size_t j = 0; j < win; ++j) {
            const double di = static_cast<double>(i) - half, dj = static_cast<double>(j) - half;
            kernel[i * win + j] = std::exp(-(di * di + dj * dj) / (2.0 * o.sigma * o.sigma));
            ksum += kernel[i * win + j];
        }
    }
    for (auto& k : kernel) k /= ksum;
    const double c1 = (o.k1 * o.dynamic_range) * (o.k1 * o.dynamic_range);
    const double c2 = (o.k2 * o.dynamic_range) * (o.k2 * o.dynamic_range);

    const std::size_t oh = x.height - win + 1, ow = x.width - win + 1;
    double total = 0.0;
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (std::size_t i = 0; i < win; ++i) {
                for (std::size_t j = 0; j < win; ++j) {
                    const double k = kernel[i * win + j];
                    const double a = x.at(r + i, c + j), b = y.at(r + i, c + j);
                    mx += k * a;
                    my += k * b;
                    sxx += k * a * a;
                    syy += k * b * b;
                    sxy += k * a * b;
                }
            }
            const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    }
    return total / static_cast<double>(oh * ow);
}

GrayImage phase_congruency(const GrayImage& image, const FsimOptions& o) {
    const std::size_t rows = image.height, cols = image.width, n = rows * cols;
    constexpr double kEpsilon = 1e-4;
    const double pi = std::numbers::pi;
    const double theta_sigma = pi / static_cast<double>(o.orientations) / o.d_theta_on_sigma;

    ComplexGrid image_fft(n);
    for (std::size_t i = 0; i < n; ++i) image_fft[i] = image.pixels[i];
    fft2(image_fft, rows, cols, false);

    std::vector<double> radius(n), sin_theta(n), cos_theta(n), lowpass(n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double fx = freq_coord(c, cols), fy = freq_coord(r, rows);
            const std::size_t i = r * cols + c;
            radius[i] = std::sqrt(fx * fx + fy * fy);
            const double theta = std::atan2(-fy, fx);
            sin_theta[i] = std::sin(theta);
            cos_theta[i] = std::cos(theta);
            lowpass[i] = 1.0 / (1.0 + std::pow(radius[i] / 0.45, 30.0));
        }
    }
    radius[0] = 1.0;

    std::vector<std::vector<double>> log_gabor(o.scales, std::vector<double>(n));
    for (std::size_t s = 0; s < o.scales; ++s) {
        const double fo = 1.0 / (o.min_wavelength * std::pow(o.mult, static_cast<double>(s)));
        const double denom = 2.0 * std::log(o.sigma_on_f) * std::log(o.sigma_on_f);
        for (std::size_t i = 0; i < n; ++i) {
            const double lr = std::log(radius[i] / fo);
            log_gabor[s][i] = std::exp(-(lr * lr) / denom) * lowpass[i];
        }
        log_gabor[s][0] = 0.0;
    }

    std::vector<double> energy_all(n, 0.0), an_all(n, 0.0);
    std::vector<std::vector<double>> ifft_filters(o.scales, std::vector<double>(n));
    std::vector<ComplexGrid> responses(o.scales, ComplexGrid(n));
    const double root_n = std::sqrt(static_cast<double>(n));

    for (std::size_t orient = 0; orient < o.orientations; ++orient) {
        const double angle = static_cast<double>(orient) * pi / static_cast<double>(o.orientations);
        std::vector<double> spread(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double ds = sin_theta[i] * std::cos(angle) - cos_theta[i] * std::sin(angle);
            const double dc = cos_theta[i] * std::cos(angle) + sin_theta[i] * std::sin(angle);
            const double dtheta = std::abs(std::atan2(ds, dc));
            spread[i] = std::exp(-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma));
        }

        std::vector<double> sum_e(n, 0.0), sum_o(n, 0.0), sum_an(n, 0.0);
        double em_n = 0.0;
        for (std::size_t s = 0; s < o.scales; ++s) {
            std::vector<double> filter(n);
            for (std::size_t i = 0; i < n; ++i) filter[i] = log_gabor[s][i] * spread[i];

            ComplexGrid f(filter.begin(), filter.end());
            fft2(f, rows, cols, true);
            for (std::size_t i = 0; i < n; ++i) ifft_filters[s][i] = f[i].real() * root_n;

            auto& eo = responses[s];
            for (std::size_t i = 0; i < n; ++i) eo[i] = image_fft[i] * filter[i];
            fft2(eo, rows, cols, true);
            for (std::size_t i = 0; i < n; ++i) {
                sum_an[i] += std::abs(eo[i]);
                sum_e[i] += eo[i].real();
                sum_o[i] += eo[i].imag();
            }
            if (s == 0) {
                for (double v : filter) em_n += v * v;
            }
        }

        std::vector<double> energy(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double x_energy = std::sqrt(sum_e[i] * sum_e[i] + sum_o[i] * sum_o[i]) + kEpsilon;
            const double mean_e = sum_e[i] / x_energy, mean_o = sum_o[i] / x_energy;
            for (std::size_t s = 0; s < o.scales; ++s) {
                const double e = responses[s][i].real(), od = responses[s][i].imag();
                energy[i] += e * mean_e + od * mean_o - std::abs(e * mean_o - od * mean_e);
            }
        }

        std::vector<double> e2(n);
        for (std::size_t i = 0; i < n; ++i) e2[i] = std::norm(responses[0][i]);
        const double mean_e2n = -median(std::move(e2)) / std::log(0.5);
        const double noise_power = mean_e2n / em_n;

        double sum_an2 = 0.0, sum_aiaj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t s = 0; s < o.scales; ++s) sum_an2 += ifft_filters[s][i] * ifft_filters[s][i];
            for (std::size_t si = 0; si + 1 < o.scales; ++si)
                for (std::size_t sj = si + 1; sj < o.scales; ++sj) sum_aiaj += ifft_filters[si][i] * ifft_filters[sj][i];
        }
        const double est_noise_energy2 = 2.0 * noise_power * sum_an2 + 4.0 * noise_power * sum_aiaj;
        const double tau = std::sqrt(est_noise_energy2 / 2.0);
        const double est_noise_energy = tau * std::sqrt(pi / 2.0);
        const double est_noise_sigma = std::sqrt((2.0 - pi / 2.0) * tau * tau);
        const double threshold = (est_noise_energy + o.noise_k * est_noise_sigma) / 1.7;

        for (std::size_t i = 0; i < n; ++i) {
            energy_all[i] += std::max(energy[i] - threshold, 0.0);
            an_all[i] += sum_an[i];
        }
    }

    GrayImage pc{rows, cols, std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) pc.pixels[i] = an_all[i] > 0.0 ? energy_all[i] / an_all[i] : 0.0;
    return pc;
}

double fsim(const GrayImage& x, const GrayImage& y, const FsimOptions& o) {
    require_same_size(x, y, "fsim");
    GrayImage a = x, b = y;
    for (auto& v : a.pixels) v *= 255.0;
    for (auto& v : b.pixels) v *= 255.0;
    // Images up to 256 px need no pre-downsampling (the reference factor rounds to 1).
    const auto pc1 = phase_congruency(a, o);
    const auto pc2 = phase_congruency(b, o);
    const auto g1 = gradient_magnitude(a);
    const auto g2 = gradient_magnitude(b);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double p1 = pc1.pixels[i], p2 = pc2.pixels[i];
        const double pc_sim = (2.0 * p1 * p2 + o.t1) / (p1 * p1 + p2 * p2 + o.t1);
        const double g_sim = (2.0 * g1[i] * g2[i] + o.t2) / (g1[i] * g1[i] + g2[i] * g2[i] + o.t2);
        const double pcm = std::max(p1, p2);
        num += g_sim * pc_sim * pcm;
        den += pcm;
    }
    // Two featureless images carry no structure to disagree on.
    return den > 0.0 ? num / den : 1.0;
}

double frechet_from_stats(const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a, const Eigen::VectorXd& mean_b,
                          const Eigen::MatrixXd& cov_b) {
    if (mean_a.size() != mean_b.size() || cov_a.rows() != mean_a.size() || cov_b.rows() != mean_b.size() ||
        cov_a.cols() != cov_a.rows() || cov_b.cols() != cov_b.rows()) {
        throw ShapeError("frechet: feature widths differ");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_a(0.5 * (cov_a + cov_a.transpose()));
    Eigen::VectorXd root_vals = eig_a.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd root_a = eig_a.eigenvectors() * root_vals.asDiagonal() * eig_a.eigenvectors().transpose();
    Eigen::MatrixXd inner = root_a * cov_b * root_a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_inner(0.5 * (inner + inner.transpose()),
                                                             Eigen::EigenvaluesOnly);
    const double trace_sqrt = eig_inner.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double d = (mean_a - mean_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * trace_sqrt;
    return std::max(d, 0.0);
}

double frechet_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("frechet: feature widths differ (" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.cols()) + ")");
    }
    if (a.rows() < 2 || b.rows() < 2) throw ShapeError("frechet: each feature set needs at least two rows");
    auto stats = [](const Eigen::MatrixXd& m) {
        Eigen::VectorXd mu = m.colwise().mean().transpose();
        Eigen::MatrixXd centered = m.rowwise() - mu.transpose();
        Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(m.rows() - 1);
        return std::pair{mu, cov};
    };
    auto [mu_a, cov_a] = stats(a);
    auto [mu_b, cov_b] = stats(b);
    return frechet_from_stats(mu_a, cov_a, mu_b, cov_b);
}

std::string MetricReport::summary_json() const {
    nlohmann::ordered_json j;
    j["ssim_mean"] = ssim_mean;
    j["fsim_mean"] = fsim_mean;
    j["frechet_proxy"] = frechet_proxy;
    j["n"] = n;
    nlohmann::ordered_json c;
    c["ssim_window"] = ssim_options.window;
    c["ssim_sigma"] = ssim_options.sigma;
    c["ssim_k1"] = ssim_options.k1;
    c["ssim_k2"] = ssim_options.k2;
    c["fsim_scales"] = fsim_options.scales;
    c["fsim_orientations"] = fsim_options.orientations;
    c["fsim_t1"] = fsim_options.t1;
    c["fsim_t2"] = fsim_options.t2;
    j["constants"] = c;
    return j.dump(2);
}

std::string MetricReport::per_sample_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "id,ssim,fsim\n";
    for (std::size_t i = 0; i < ids.size(); ++i) os << ids[i] << ',' << ssim[i] << ',' << fsim[i] << '\n';
    return os.str();
}

}  // namespace sgs
