// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mixtts/cli.hpp"
#include "mixtts/dsp.hpp"
#include "mixtts/error.hpp"
#include "mixtts/inversion.hpp"
#include "mixtts/textfrontend.hpp"

namespace py = pybind11;
using namespace mixtts;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  return Matrix(a.shape(0), a.shape(1), std::vector<double>(a.data(), a.data() + a.size()));
}

dsp::Waveform to_waveform(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return {std::vector<double>(a.data(), a.data() + a.size()), dsp::kSampleRate};
}

Array samples(const dsp::Waveform& w) {
  Array out(static_cast<py::ssize_t>(w.samples.size()));
  std::copy(w.samples.begin(), w.samples.end(), out.mutable_data());
  return out;
}

py::tuple encode(const std::string& sentence, const std::string& lexicon_text,
                 const std::string& mode, double p_phone, std::uint64_t seed) {
  const text::Lexicon lexicon = text::parse_lexicon(lexicon_text);
  const auto record = text::make_record("py", sentence, std::nullopt, {}, &lexicon);
  text::MixedSequence seq;
  if (mode == "chars") {
    seq = text::encode_fixed(record, lexicon, text::FixedMode::kChars);
  } else if (mode == "pwcb") {
    seq = text::encode_fixed(record, lexicon, text::FixedMode::kPwcb);
  } else if (mode == "mixed") {
    Rng rng(seed);
    seq = text::mix_words(record, lexicon, p_phone, rng);
  } else {
    throw py::value_error("mode must be chars, pwcb or mixed");
  }
  return py::make_tuple(seq.symbols, seq.mask, text::describe(seq));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "mixtts core bindings";
  py::register_exception<Error>(m, "MixttsError", PyExc_RuntimeError);

  m.attr("SAMPLE_RATE") = dsp::kSampleRate;
  m.attr("N_MELS") = dsp::kMels;

  m.def("normalize_text", &text::normalize_text, py::arg("raw"));
  m.def("encode", &encode, py::arg("text"), py::arg("lexicon"), py::arg("mode") = "pwcb",
        py::arg("p_phone") = 0.5, py::arg("seed") = 0,
        "Returns (symbols, mask, description).");
  m.def(
      "stft_mag", [](const Array& w) { return to_array(dsp::stft_mag(to_waveform(w).samples)); },
      py::arg("samples"));
  m.def(
      "logmel", [](const Array& w) { return to_array(dsp::logmel(to_waveform(w)).frames); },
      py::arg("samples"));
  m.def("mel_matrix", []() { return to_array(dsp::mel_matrix()); });
  m.def(
      "invert",
      [](const Array& target, const std::string& method, std::size_t lbfgs_iters,
         std::size_t gl_iters, std::uint64_t seed) {
        const inversion::InversionConfig config{inversion::parse_method(method), lbfgs_iters,
                                                gl_iters, 10, seed};
        const Matrix t = to_matrix(target);
        dsp::Waveform w;
        {
          py::gil_scoped_release release;
          w = inversion::invert(t, config);
        }
        return samples(w);
      },
      py::arg("logmel"), py::arg("method") = "lbfgs_then_gl", py::arg("lbfgs_iters") = 100,
      py::arg("gl_iters") = 100, py::arg("seed") = 0);
  m.def("strtf", &inversion::strtf_from_seconds_per_sample, py::arg("seconds_per_sample"));
  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "mixtts");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line in-process; returns (exit code, stdout, stderr).");
}
