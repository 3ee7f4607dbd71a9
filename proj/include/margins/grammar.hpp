#pragma once

#include <cctype>
#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "margins/distributions.hpp"
#include "margins/errors.hpp"

namespace margins {

// Parse failure for distribution spec strings. The message embeds the source
// and a caret under the offending position.
class GrammarError : public Error {
 public:
  GrammarError(std::string_view spec, std::size_t position, const std::string& what)
      : Error(render(spec, position, what)), position_(position) {}
  const char* kind() const override { return "GrammarError"; }
  std::size_t position() const { return position_; }

 private:
  static std::string render(std::string_view spec, std::size_t pos, const std::string& what) {
    std::string msg = what;
    msg += "\n  ";
    msg += spec;
    msg += "\n  ";
    msg += std::string(pos > spec.size() ? spec.size() : pos, ' ');
    msg += '^';
    return msg;
  }
  std::size_t position_;
};

namespace detail {

class SpecParser {
 public:
  explicit SpecParser(std::string_view src) : src_(src) {}

  MarginDistribution parse() {
    MarginDistribution dist = parse_call();
    skip_ws();
    while (!done() && peek() == '|') {
      ++pos_;
      dist = parse_suffix(dist);
      skip_ws();
    }
    if (!done()) fail(pos_, "unexpected trailing input");
    return dist;
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& what) const {
    throw GrammarError(src_, at, what);
  }

  bool done() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }
  void skip_ws() {
    while (!done() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (done() || peek() != c) fail(pos_, std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string_view ident() {
    skip_ws();
    const std::size_t start = pos_;
    while (!done() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
    if (pos_ == start) fail(start, "expected a name");
    return src_.substr(start, pos_ - start);
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    double value = 0.0;
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) fail(start, "expected a number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  std::vector<double> arguments(std::size_t at_least, std::size_t at_most) {
    expect('(');
    std::vector<double> args;
    skip_ws();
    if (!done() && peek() != ')') {
      args.push_back(number());
      skip_ws();
      while (!done() && peek() == ',') {
        const std::size_t before_comma = pos_;
        ++pos_;
        skip_ws();
        // named base kernels are the only non-numeric arguments; leave the
        // comma unconsumed for the caller
        if (!done() && std::isalpha(static_cast<unsigned char>(peek()))) {
          pos_ = before_comma;
          break;
        }
        args.push_back(number());
        skip_ws();
      }
    }
    if (args.size() < at_least || args.size() > at_most) {
      fail(pos_, "expected " + std::to_string(at_least) +
                     (at_least == at_most ? "" : " to " + std::to_string(at_most)) +
                     " numeric arguments, got " + std::to_string(args.size()));
    }
    return args;
  }

  BaseKernel kernel(std::string_view name, std::size_t at) {
    if (name == "normal") return BaseKernel::Normal;
    if (name == "logistic") return BaseKernel::Logistic;
    fail(at, "unknown base kernel: " + std::string(name) + " (use normal or logistic)");
  }

  MarginDistribution parse_call() {
    skip_ws();
    const std::size_t start = pos_;
    const std::string_view name = ident();
    try {
      if (name == "gaussian") {
        const auto a = arguments(2, 2);
        expect(')');
        return Gaussian(a[0], a[1]);
      }
      if (name == "mix2") {
        const auto a = arguments(5, 5);
        expect(')');
        return TwoGaussianMixture(a[0], a[1], a[2], a[3], a[4]);
      }
      if (name == "skew") {
        const auto a = arguments(3, 3);
        skip_ws();
        BaseKernel h = BaseKernel::Normal, G = BaseKernel::Normal;
        if (!done() && peek() == ',') {
          ++pos_;  // the parser stopped before a named argument; read both kernels
          skip_ws();
          std::size_t at = pos_;
          h = kernel(ident(), at);
          expect(',');
          skip_ws();
          at = pos_;
          G = kernel(ident(), at);
        }
        expect(')');
        return SkewSymmetric(h, G, a[0], a[1], a[2]);
      }
    } catch (const InvalidParameter& e) {
      fail(start, e.what());
    }
    fail(start, "unknown distribution: " + std::string(name) +
                    " (use gaussian, mix2, or skew)");
  }

  MarginDistribution parse_suffix(const MarginDistribution& dist) {
    skip_ws();
    const std::size_t start = pos_;
    const std::string_view name = ident();
    Transform map = Transform::cube();
    if (name == "cube") {
      map = Transform::cube();
    } else if (name == "sinh") {
      map = Transform::sinh_map();
    } else if (name == "atan") {
      double c = 1.0;
      skip_ws();
      if (!done() && peek() == '(') {
        ++pos_;
        c = number();
        expect(')');
      }
      try {
        map = Transform::scaled_atan(c);
      } catch (const InvalidParameter& e) {
        fail(start, e.what());
      }
    } else {
      fail(start, "unknown transform: " + std::string(name) + " (use cube, sinh, or atan)");
    }
    return apply_odd_monotone(dist, map);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Parses the distribution spec mini-language:
//   gaussian(mu,sigma)
//   mix2(weight,mu1,sigma1,mu2,sigma2)
//   skew(alpha,mu,scale[,base_h,base_G])   bases: normal | logistic
// with optional transform suffixes |cube, |sinh, |atan, |atan(c).
inline MarginDistribution parse_distribution_spec(std::string_view spec) {
  return detail::SpecParser(spec).parse();
}

}  // namespace margins
