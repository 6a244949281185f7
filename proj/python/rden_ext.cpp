#include "rden/commands.hpp"
#include "rden/config.hpp"
#include "rden/data.hpp"
#include "rden/denoisers.hpp"
#include "rden/error.hpp"
#include "rden/estimators.hpp"
#include "rden/metrics.hpp"
#include "rden/noise.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <sstream>

namespace py = pybind11;
using namespace rden;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const Array& a)
{
    if (a.ndim() != 2)
        throw py::value_error("expected a 2-d array");
    Image img(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)));
    std::copy(a.data(), a.data() + a.size(), img.data.begin());
    return img;
}

Array to_array(const Image& img)
{
    Array out({img.height, img.width});
    std::copy(img.data.begin(), img.data.end(), out.mutable_data());
    return out;
}

NoiseSpec noise_spec(const std::string& kind, double a, double b)
{
    if (kind == "gaussian")
        return noise::Gaussian{a};
    if (kind == "gaussian_pair")
        return noise::GaussianPair{a, b};
    if (kind == "gaussian_independent_pair")
        return noise::GaussianIndependentPair{a};
    if (kind == "poisson")
        return noise::Poisson{a};
    if (kind == "poisson_pair")
        return noise::PoissonPair{a};
    throw py::value_error("unknown noise kind '" + kind + "'");
}

py::dict report_dict(const StudyReport& r)
{
    py::dict d;
    d["estimator"] = r.estimator_name;
    d["denoiser"] = r.denoiser_name;
    d["noise"] = r.noise_kind;
    d["noise_params"] = r.noise_params;
    d["draws"] = r.draws;
    d["estimator_mean"] = r.estimator_mean;
    d["estimator_stderr"] = r.estimator_stderr;
    d["true_mse_mean"] = r.true_mse_mean;
    d["true_mse_stderr"] = r.true_mse_stderr;
    d["bias_in_stderr_units"] = r.bias_in_stderr_units;
    return d;
}

} // namespace

PYBIND11_MODULE(_rden, m)
{
    m.doc() = "Unbiased risk estimators and a small residual denoiser";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_IOError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<SeededStream>(m, "SeededStream")
        .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream_id") = 0)
        .def("split", &SeededStream::split)
        .def("uniform", &SeededStream::uniform)
        .def("normal", &SeededStream::normal)
        .def("poisson", &SeededStream::poisson);

    py::class_<Denoiser>(m, "Denoiser")
        .def_property_readonly("name", &Denoiser::name)
        .def("__call__", [](const Denoiser& h, const Array& y) { return to_array(h(to_image(y))); })
        .def("divergence", [](const Denoiser& h, const Array& y) { return h.analytic_divergence(to_image(y)); });

    m.def("identity", &denoisers::identity);
    m.def("constant", &denoisers::constant, py::arg("value"));
    m.def("box", [](std::size_t size) { return denoisers::conv_filter(ConvKernel::box(size)); },
          py::arg("size") = 3);
    m.def("soft_threshold", &denoisers::soft_threshold, py::arg("tau"));

    m.def("phantom", [](std::size_t size, std::uint64_t seed, std::size_t index) {
        PhantomSpec spec;
        spec.size = size;
        spec.seed = seed;
        return to_array(phantom_image(spec, index));
    }, py::arg("size") = 64, py::arg("seed") = 1, py::arg("index") = 0);

    m.def("corrupt", [](const Array& x, const std::string& kind, double a, double b, SeededStream& rng) -> py::tuple {
        const ImagePair p = corrupt(to_image(x), noise_spec(kind, a, b), rng);
        if (p.second.size() == 0)
            return py::make_tuple(to_array(p.first));
        return py::make_tuple(to_array(p.first), to_array(p.second));
    }, py::arg("x"), py::arg("kind"), py::arg("a"), py::arg("b") = 0.0, py::arg("rng"));

    m.def("mse", [](const Array& x, const Array& xh) { return mse(to_image(x), to_image(xh)).total; });
    m.def("sure", [](const Array& y, const Denoiser& h, double sigma) {
        const Image img = to_image(y);
        return sure_analytic(img, h(img), DivergenceEstimate::analytic(h.analytic_divergence(img)), sigma).total;
    }, py::arg("y"), py::arg("h"), py::arg("sigma"));
    m.def("mc_divergence", [](const Denoiser& h, const Array& y, double eps, SeededStream& rng, std::size_t draws) {
        return mc_divergence(h, to_image(y), eps, rng, draws).value;
    }, py::arg("h"), py::arg("y"), py::arg("epsilon"), py::arg("rng"), py::arg("draws") = 1);
    m.def("pure", [](const Array& y, const Denoiser& h, double peak, double eps, SeededStream& rng) {
        return pure_single(to_image(y), h, peak, eps, rng).total;
    }, py::arg("y"), py::arg("h"), py::arg("peak"), py::arg("epsilon") = kDefaultEpsilon, py::arg("rng"));
    m.def("epure", [](const Array& y1, const Array& y2, const Denoiser& h, double target_peak, double eps,
                      SeededStream& rng) {
        return epure_pair(to_image(y1), to_image(y2), h, target_peak, eps, rng).total;
    }, py::arg("y1"), py::arg("y2"), py::arg("h"), py::arg("target_peak"), py::arg("epsilon") = kDefaultEpsilon,
       py::arg("rng"));

    m.def("unbiasedness_study", [](const std::string& estimator, const Denoiser& h, const Array& x,
                                   const std::string& kind, double a, double b, std::size_t draws,
                                   std::uint64_t seed) {
        SeededStream rng(seed);
        return report_dict(unbiasedness_study(EstimatorSpec{parse_estimator(estimator)}, h, to_image(x),
                                              noise_spec(kind, a, b), draws, rng));
    }, py::arg("estimator"), py::arg("h"), py::arg("x"), py::arg("kind"), py::arg("a"), py::arg("b") = 0.0,
       py::arg("draws") = 2000, py::arg("seed") = 1);

    m.def("psnr", [](const Array& r, const Array& t, double peak) { return psnr(to_image(r), to_image(t), peak); },
          py::arg("reference"), py::arg("test"), py::arg("peak") = 1.0);
    m.def("ssim", [](const Array& r, const Array& t, double peak) { return ssim(to_image(r), to_image(t), peak); },
          py::arg("reference"), py::arg("test"), py::arg("peak") = 1.0);

    m.def("run_command", [](const std::string& name, const std::map<std::string, std::string>& settings) {
        RunConfig cfg;
        for (const auto& [k, v] : settings)
            cfg.set(k, v);
        std::ostringstream log;
        const int code = run_command(name, cfg, log);
        return py::make_tuple(code, log.str());
    }, py::arg("name"), py::arg("settings"));
}
