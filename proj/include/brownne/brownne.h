/* C interface to the brownne library. All functions return a brownne_status;
   on failure brownne_last_error() describes the problem (per thread). */
#ifndef BROWNNE_H
#define BROWNNE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BROWNNE_API __declspec(dllexport)
#else
#define BROWNNE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum brownne_status {
  BROWNNE_OK = 0,
  BROWNNE_ERR_CONTRACT = 1,   /* invalid argument or handle */
  BROWNNE_ERR_EVALUATION = 2, /* non-finite value produced */
  BROWNNE_ERR_DOMAIN = 3,
  BROWNNE_ERR_RESOLUTION = 4,
  BROWNNE_ERR_PARSE = 5,
  BROWNNE_ERR_CONFIG = 6,
  BROWNNE_ERR_IO = 7,
  BROWNNE_ERR_INTERNAL = 99
} brownne_status;

typedef enum brownne_family {
  BROWNNE_GAUSSIAN = 0,
  BROWNNE_LINEAR_RECT = 1,
  BROWNNE_EXPONENTIAL_RECT = 2
} brownne_family;

typedef struct brownne_rng brownne_rng;
typedef struct brownne_kernel brownne_kernel;
typedef struct brownne_mlp brownne_mlp;

/* Scalar field u(x) evaluated through a callback. */
typedef double (*brownne_field_fn)(const double* x, size_t dim, void* user);

BROWNNE_API const char* brownne_last_error(void);
BROWNNE_API const char* brownne_version(void);

BROWNNE_API brownne_status brownne_rng_create(uint64_t seed, brownne_rng** out);
BROWNNE_API brownne_status brownne_rng_derive(uint64_t master, const char* tag, uint64_t index,
                                              brownne_rng** out);
BROWNNE_API void brownne_rng_destroy(brownne_rng* rng);
BROWNNE_API brownne_status brownne_rng_uniform(brownne_rng* rng, double* out);
BROWNNE_API brownne_status brownne_rng_normal(brownne_rng* rng, double* out);

BROWNNE_API brownne_status brownne_kernel_create(brownne_family family, int n, brownne_kernel** out);
BROWNNE_API brownne_status brownne_kernel_parse(const char* text, brownne_kernel** out);
BROWNNE_API void brownne_kernel_destroy(brownne_kernel* kernel);
BROWNNE_API brownne_status brownne_kernel_pdf(const brownne_kernel* kernel, double t, double* out);
BROWNNE_API brownne_status brownne_kernel_support(const brownne_kernel* kernel, double* lo, double* hi);
BROWNNE_API brownne_status brownne_kernel_moment(const brownne_kernel* kernel, int k, double* out);
BROWNNE_API brownne_status brownne_kernel_tail(const brownne_kernel* kernel, double delta, double* out);
BROWNNE_API brownne_status brownne_kernel_sample(const brownne_kernel* kernel, brownne_rng* rng, double* out);

/* D_{n,v}u(x) by composite Gauss-Legendre quadrature (order x panels; 0 means
   the defaults 64 x 4). */
BROWNNE_API brownne_status brownne_ndd_quadrature(brownne_field_fn u, void* user, size_t dim,
                                                  const double* x, const double* v,
                                                  const brownne_kernel* kernel, int order, int panels,
                                                  double* out);
/* Monte Carlo estimate with m >= 2 samples; std_error may be NULL. */
BROWNNE_API brownne_status brownne_ndd_monte_carlo(brownne_field_fn u, void* user, size_t dim,
                                                   const double* x, const double* v,
                                                   const brownne_kernel* kernel, size_t m,
                                                   brownne_rng* rng, double* out, double* std_error);
/* Nonlocal gradient along the coordinate axes with indices n[i] of one family.
   grad receives dim values. */
BROWNNE_API brownne_status brownne_nonlocal_gradient(brownne_field_fn u, void* user, size_t dim,
                                                     const double* x, const int* n,
                                                     brownne_family family, double* grad);

BROWNNE_API brownne_status brownne_brownian_forward(double z, int n, double v, double alpha,
                                                    brownne_rng* rng, double* out);
BROWNNE_API brownne_status brownne_brownian_backward(double z, int n, double v, double alpha,
                                                     brownne_rng* rng, double* out);
BROWNNE_API brownne_status brownne_brownian_variance(int n, double v, double* out);

/* Disc image at theta (resolution x resolution, row-major, supersample >= 1).
   pixels must hold resolution * resolution doubles. */
BROWNNE_API brownne_status brownne_render_disc(double theta, int resolution, int supersample,
                                               double* pixels);
/* E(theta) = ||I_theta - target|| for a target rendered at target_theta. */
BROWNNE_API brownne_status brownne_disc_objective(double theta, double target_theta, int resolution,
                                                  int supersample, double* out);

/* Multilayer perceptron. widths has layers + 1 entries (input, hidden...,
   output); brownian[i] != 0 marks hidden layer i as Brownian ReLU. */
BROWNNE_API brownne_status brownne_mlp_create(const int* widths, size_t count, const int* brownian,
                                              int n, double v, double alpha, uint64_t seed,
                                              brownne_mlp** out);
BROWNNE_API brownne_status brownne_mlp_load(const char* path, brownne_mlp** out);
BROWNNE_API brownne_status brownne_mlp_save(const brownne_mlp* mlp, const char* path);
BROWNNE_API void brownne_mlp_destroy(brownne_mlp* mlp);
BROWNNE_API brownne_status brownne_mlp_parameter_count(const brownne_mlp* mlp, size_t* out);
/* Noise-free forward pass on rows x input features; logits receives
   rows x output values (row-major). */
BROWNNE_API brownne_status brownne_mlp_predict(const brownne_mlp* mlp, const double* features, size_t rows,
                                               double* logits);

/* Runs a harness subcommand; config_path may be NULL or "" for defaults and
   threads <= 0 picks the default worker count. */
BROWNNE_API brownne_status brownne_run(const char* subcommand, const char* config_path, uint64_t seed,
                                       const char* out_dir, int threads);

#ifdef __cplusplus
}
#endif

#endif
