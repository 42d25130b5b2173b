#include "brownne/brownne.h"

#include <cstring>
#include <string>

#include "brownne/brownian.hpp"
#include "brownne/error.hpp"
#include "brownne/experiments.hpp"
#include "brownne/iam.hpp"
#include "brownne/kernels.hpp"
#include "brownne/mlp.hpp"
#include "brownne/ndd.hpp"
#include "brownne/parallel.hpp"
#include "brownne/report.hpp"

struct brownne_rng {
  brownne::RandomStream stream;
};

struct brownne_kernel {
  brownne::Kernel kernel;
};

struct brownne_mlp {
  brownne::MlpSpec spec;
  brownne::MlpParams params;
};

namespace {

thread_local std::string last_error;

template <class F>
brownne_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return BROWNNE_OK;
  } catch (const brownne::ContractError& e) {
    last_error = e.what();
    return BROWNNE_ERR_CONTRACT;
  } catch (const brownne::EvaluationError& e) {
    last_error = e.what();
    return BROWNNE_ERR_EVALUATION;
  } catch (const brownne::DomainError& e) {
    last_error = e.what();
    return BROWNNE_ERR_DOMAIN;
  } catch (const brownne::ResolutionError& e) {
    last_error = e.what();
    return BROWNNE_ERR_RESOLUTION;
  } catch (const brownne::ParseError& e) {
    last_error = e.what();
    return BROWNNE_ERR_PARSE;
  } catch (const brownne::ConfigError& e) {
    last_error = e.what();
    return BROWNNE_ERR_CONFIG;
  } catch (const brownne::IoError& e) {
    last_error = e.what();
    return BROWNNE_ERR_IO;
  } catch (const std::exception& e) {
    last_error = e.what();
    return BROWNNE_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return BROWNNE_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw brownne::ContractError(what);
}

brownne::KernelFamily to_family(brownne_family f) {
  switch (f) {
    case BROWNNE_GAUSSIAN:
      return brownne::KernelFamily::gaussian;
    case BROWNNE_LINEAR_RECT:
      return brownne::KernelFamily::linear_rect;
    case BROWNNE_EXPONENTIAL_RECT:
      return brownne::KernelFamily::exponential_rect;
  }
  throw brownne::ContractError("unknown kernel family");
}

brownne::ScalarField field(brownne_field_fn u, void* user, std::size_t dim) {
  require(u != nullptr, "field callback is null");
  require(dim > 0, "dimension must be positive");
  return {dim, [u, user](std::span<const double> x) { return u(x.data(), x.size(), user); }};
}

}  // namespace

extern "C" {

const char* brownne_last_error(void) { return last_error.c_str(); }

const char* brownne_version(void) {
  static const std::string v = "brownne 1.0 (" + brownne::build_id() + ")";
  return v.c_str();
}

brownne_status brownne_rng_create(uint64_t seed, brownne_rng** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = new brownne_rng{brownne::RandomStream(seed)};
  });
}

brownne_status brownne_rng_derive(uint64_t master, const char* tag, uint64_t index, brownne_rng** out) {
  return guarded([&] {
    require(out && tag, "null argument");
    *out = new brownne_rng{brownne::RandomStream::derive(master, tag, index)};
  });
}

void brownne_rng_destroy(brownne_rng* rng) { delete rng; }

brownne_status brownne_rng_uniform(brownne_rng* rng, double* out) {
  return guarded([&] {
    require(rng && out, "null argument");
    *out = rng->stream.uniform();
  });
}

brownne_status brownne_rng_normal(brownne_rng* rng, double* out) {
  return guarded([&] {
    require(rng && out, "null argument");
    *out = rng->stream.normal();
  });
}

brownne_status brownne_kernel_create(brownne_family family, int n, brownne_kernel** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = new brownne_kernel{brownne::Kernel(to_family(family), n)};
  });
}

brownne_status brownne_kernel_parse(const char* text, brownne_kernel** out) {
  return guarded([&] {
    require(out && text, "null argument");
    *out = new brownne_kernel{brownne::Kernel::parse(text)};
  });
}

void brownne_kernel_destroy(brownne_kernel* kernel) { delete kernel; }

brownne_status brownne_kernel_pdf(const brownne_kernel* kernel, double t, double* out) {
  return guarded([&] {
    require(kernel && out, "null argument");
    *out = kernel->kernel.pdf(t);
  });
}

brownne_status brownne_kernel_support(const brownne_kernel* kernel, double* lo, double* hi) {
  return guarded([&] {
    require(kernel && lo && hi, "null argument");
    const auto s = kernel->kernel.support();
    *lo = s.lo;
    *hi = s.hi;
  });
}

brownne_status brownne_kernel_moment(const brownne_kernel* kernel, int k, double* out) {
  return guarded([&] {
    require(kernel && out, "null argument");
    *out = kernel->kernel.moment(k);
  });
}

brownne_status brownne_kernel_tail(const brownne_kernel* kernel, double delta, double* out) {
  return guarded([&] {
    require(kernel && out, "null argument");
    *out = kernel->kernel.tail(delta);
  });
}

brownne_status brownne_kernel_sample(const brownne_kernel* kernel, brownne_rng* rng, double* out) {
  return guarded([&] {
    require(kernel && rng && out, "null argument");
    *out = kernel->kernel.sample(rng->stream);
  });
}

brownne_status brownne_ndd_quadrature(brownne_field_fn u, void* user, size_t dim, const double* x,
                                      const double* v, const brownne_kernel* kernel, int order, int panels,
                                      double* out) {
  return guarded([&] {
    require(x && v && kernel && out, "null argument");
    brownne::QuadratureConfig quad;
    if (order > 0) quad.order = order;
    if (panels > 0) quad.panels = panels;
    *out = brownne::ndd_quadrature(field(u, user, dim), {x, dim}, {v, dim}, kernel->kernel, quad).value;
  });
}

brownne_status brownne_ndd_monte_carlo(brownne_field_fn u, void* user, size_t dim, const double* x,
                                       const double* v, const brownne_kernel* kernel, size_t m,
                                       brownne_rng* rng, double* out, double* std_error) {
  return guarded([&] {
    require(x && v && kernel && rng && out, "null argument");
    const auto est = brownne::ndd_monte_carlo(field(u, user, dim), {x, dim}, {v, dim}, kernel->kernel, m, rng->stream);
    *out = est.value;
    if (std_error) *std_error = est.std_error;
  });
}

brownne_status brownne_nonlocal_gradient(brownne_field_fn u, void* user, size_t dim, const double* x,
                                         const int* n, brownne_family family, double* grad) {
  return guarded([&] {
    require(x && n && grad, "null argument");
    brownne::RandomStream unused(0);
    const auto g = brownne::nonlocal_gradient(field(u, user, dim), {x, dim}, brownne::MultiIndex{{n, n + dim}},
                                              to_family(family), brownne::GradientOptions{}, unused);
    std::memcpy(grad, g.data(), dim * sizeof(double));
  });
}

brownne_status brownne_brownian_forward(double z, int n, double v, double alpha, brownne_rng* rng, double* out) {
  return guarded([&] {
    require(rng && out, "null argument");
    *out = brownne::forward_activation(z, brownne::BrownianSpec(n, v, alpha), rng->stream);
  });
}

brownne_status brownne_brownian_backward(double z, int n, double v, double alpha, brownne_rng* rng, double* out) {
  return guarded([&] {
    require(rng && out, "null argument");
    *out = brownne::backward_activation(z, brownne::BrownianSpec(n, v, alpha), rng->stream);
  });
}

brownne_status brownne_brownian_variance(int n, double v, double* out) {
  return guarded([&] {
    require(out, "out is null");
    *out = brownne::BrownianSpec(n, v, 0.0).variance();
  });
}

brownne_status brownne_render_disc(double theta, int resolution, int supersample, double* pixels) {
  return guarded([&] {
    require(pixels, "pixels is null");
    const auto img = brownne::render_disc(theta, resolution, supersample);
    std::memcpy(pixels, img.pixels.data(), img.pixels.size() * sizeof(double));
  });
}

brownne_status brownne_disc_objective(double theta, double target_theta, int resolution, int supersample,
                                      double* out) {
  return guarded([&] {
    require(out, "out is null");
    *out = brownne::objective(theta, brownne::render_disc(target_theta, resolution, supersample));
  });
}

brownne_status brownne_mlp_create(const int* widths, size_t count, const int* brownian, int n, double v,
                                  double alpha, uint64_t seed, brownne_mlp** out) {
  return guarded([&] {
    require(widths && out, "null argument");
    require(count >= 3, "need input, at least one hidden and an output width");
    brownne::MlpSpec spec;
    spec.layer_widths.assign(widths, widths + count);
    spec.seed = seed;
    for (std::size_t l = 0; l + 2 < count; ++l) {
      spec.activations.push_back(brownian && brownian[l]
                                     ? brownne::LayerActivation::brownian_relu(brownne::BrownianSpec(n, v, alpha))
                                     : brownne::LayerActivation::relu());
    }
    spec.validate();
    auto params = brownne::init_params(spec);
    *out = new brownne_mlp{std::move(spec), std::move(params)};
  });
}

brownne_status brownne_mlp_load(const char* path, brownne_mlp** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto [spec, params] = brownne::load_checkpoint(path);
    *out = new brownne_mlp{std::move(spec), std::move(params)};
  });
}

brownne_status brownne_mlp_save(const brownne_mlp* mlp, const char* path) {
  return guarded([&] {
    require(mlp && path, "null argument");
    brownne::save_checkpoint(path, mlp->spec, mlp->params);
  });
}

void brownne_mlp_destroy(brownne_mlp* mlp) { delete mlp; }

brownne_status brownne_mlp_parameter_count(const brownne_mlp* mlp, size_t* out) {
  return guarded([&] {
    require(mlp && out, "null argument");
    *out = mlp->params.parameter_count();
  });
}

brownne_status brownne_mlp_predict(const brownne_mlp* mlp, const double* features, size_t rows, double* logits) {
  return guarded([&] {
    require(mlp && features && logits, "null argument");
    require(rows > 0, "rows must be positive");
    const auto in = static_cast<Eigen::Index>(mlp->spec.layer_widths.front());
    const auto outw = static_cast<Eigen::Index>(mlp->spec.layer_widths.back());
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::MatrixXd batch = Eigen::Map<const RowMajor>(features, static_cast<Eigen::Index>(rows), in);
    brownne::RandomStream unused(0);
    const auto cache = brownne::forward(mlp->params, batch, mlp->spec, brownne::Mode::eval, unused);
    Eigen::Map<RowMajor>(logits, static_cast<Eigen::Index>(rows), outw) = cache.logits;
  });
}

brownne_status brownne_run(const char* subcommand, const char* config_path, uint64_t seed, const char* out_dir,
                           int threads) {
  return guarded([&] {
    require(subcommand && out_dir, "null argument");
    brownne::run_with_config_file(subcommand, config_path ? config_path : "", seed, out_dir,
                                  threads > 0 ? threads : brownne::default_thread_count());
  });
}

}  // extern "C"
