#include "dpmarket/sweep.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "dpmarket/market_model.hpp"

namespace dpmarket {

namespace {

SweepRow row_from_equilibrium(double value, const LinearQuery& q,
                              const MarketScenario& s) {
  SweepRow row;
  row.value = value;
  row.intensity = value_intensity(q);
  row.gamma = gamma_threshold(q, s);
  const EquilibriumResult eq = stackelberg_equilibrium(q, s);
  row.regime = eq.regime;
  row.k_star = eq.k_star;
  row.sigma_star = eq.sigma_star;
  row.maker_profit = eq.maker_profit;
  row.buyer_utility = eq.buyer_utility;
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const LinearQuery& q, const MarketScenario& s,
                                const SweepRequest& request) {
  request.grid.validate();
  std::vector<SweepRow> rows;
  rows.reserve(request.grid.points);

  switch (request.variable) {
    case SweepVariable::K: {
      for (std::size_t i = 0; i < request.grid.points; ++i) {
        const double k = request.grid.at(i);
        if (k <= 0.0) {
          throw std::invalid_argument("sweep: k grid must stay positive");
        }
        SweepRow row;
        row.value = k;
        row.intensity = value_intensity(q);
        row.gamma = gamma_threshold(q, s);
        row.regime = classify_regime(q, s);
        row.k_star = k;  // the posted level this row evaluates
        row.sigma_star = buyer_best_response(q, k, s);
        row.maker_profit = maker_profit_curve(q, k, s);
        row.buyer_utility =
            row.sigma_star ? buyer_utility({q, *row.sigma_star}, k, s) : 0.0;
        rows.push_back(std::move(row));
      }
      break;
    }
    case SweepVariable::P: {
      MarketScenario varied = s;
      for (std::size_t i = 0; i < request.grid.points; ++i) {
        const double p = request.grid.at(i);
        if (!(p > 0.5 && p <= 1.0)) {
          throw std::invalid_argument(
              "sweep: p grid must stay inside (1/2, 1]");
        }
        varied.exponent = p;
        rows.push_back(row_from_equilibrium(p, q, varied));
      }
      break;
    }
    case SweepVariable::Q: {
      if (q.coeffs.size() != 1 || s.privacy_weights.size() != 1) {
        throw std::invalid_argument(
            "sweep: q sweeps require a one-dimensional scenario");
      }
      LinearQuery varied = q;
      for (std::size_t i = 0; i < request.grid.points; ++i) {
        const double qv = request.grid.at(i);
        varied.coeffs[0] = qv;
        rows.push_back(row_from_equilibrium(qv, varied, s));
      }
      break;
    }
    case SweepVariable::Gamma: {
      MarketScenario varied = s;
      for (std::size_t i = 0; i < request.grid.points; ++i) {
        const double gamma = request.grid.at(i);
        if (gamma <= 0.0) {
          throw std::invalid_argument("sweep: gamma grid must stay positive");
        }
        varied.change_bound = gamma;
        rows.push_back(row_from_equilibrium(gamma, q, varied));
      }
      break;
    }
  }
  return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::string out = "value,A,Gamma,regime,k_star,sigma_star,psi_star,phi_star\n";
  for (const SweepRow& row : rows) {
    out += format_double(row.value);
    out += ',';
    out += format_double(row.intensity);
    out += ',';
    out += format_double(row.gamma);
    out += ',';
    out += regime_name(row.regime);
    out += ',';
    out += row.k_star ? format_double(*row.k_star) : "indifferent";
    out += ',';
    out += row.sigma_star ? format_double(*row.sigma_star) : "no-trade";
    out += ',';
    out += format_double(row.maker_profit);
    out += ',';
    out += format_double(row.buyer_utility);
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(start));
      break;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

double parse_csv_number(std::string_view token) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw std::invalid_argument("sweep csv: bad number '" +
                                std::string(token) + "'");
  }
  return value;
}

}  // namespace

std::vector<SweepRow> parse_sweep_csv(std::string_view text) {
  std::vector<SweepRow> rows;
  std::size_t pos = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != "value,A,Gamma,regime,k_star,sigma_star,psi_star,phi_star") {
        throw std::invalid_argument("sweep csv: unexpected header");
      }
      saw_header = true;
      continue;
    }
    const auto parts = split(line, ',');
    if (parts.size() != 8) {
      throw std::invalid_argument("sweep csv: expected 8 columns");
    }
    SweepRow row;
    row.value = parse_csv_number(parts[0]);
    row.intensity = parse_csv_number(parts[1]);
    row.gamma = parse_csv_number(parts[2]);
    if (parts[3] == "Profitable") {
      row.regime = Regime::Profitable;
    } else if (parts[3] == "BreakEven") {
      row.regime = Regime::BreakEven;
    } else if (parts[3] == "NoTrade") {
      row.regime = Regime::NoTrade;
    } else {
      throw std::invalid_argument("sweep csv: unknown regime '" +
                                  std::string(parts[3]) + "'");
    }
    if (parts[4] != "indifferent") row.k_star = parse_csv_number(parts[4]);
    if (parts[5] != "no-trade") row.sigma_star = parse_csv_number(parts[5]);
    row.maker_profit = parse_csv_number(parts[6]);
    row.buyer_utility = parse_csv_number(parts[7]);
    rows.push_back(std::move(row));
  }
  if (!saw_header) throw std::invalid_argument("sweep csv: missing header");
  return rows;
}

}  // namespace dpmarket
