#include "polydiv/model.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "polydiv/errors.hpp"

namespace polydiv {

namespace {

void emit(std::string& out, const std::string& key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out += key;
    out += ' ';
    out += buf;
    out += '\n';
}

std::string idx1(const char* name, int i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s[%d]", name, i);
    return buf;
}

std::string idx2(const char* name, int i, int j) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s[%d][%d]", name, i, j);
    return buf;
}

class KeyMap {
public:
    explicit KeyMap(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::size_t start = line.find_first_not_of(" \t\r");
            if (start == std::string::npos || line[start] == '#') continue;
            std::istringstream fields(line);
            std::string key, value, extra;
            if (!(fields >> key >> value) || (fields >> extra)) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "model file: bad line %d", lineno);
                throw validation_error(buf);
            }
            if (!entries_.emplace(key, value).second)
                throw validation_error("model file: duplicate key " + key);
        }
    }

    double number(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end())
            throw validation_error("model file: missing key " + key);
        return parse(it);
    }

    double number_or(const std::string& key, double fallback) {
        auto it = entries_.find(key);
        return it == entries_.end() ? fallback : parse(it);
    }

    std::string text_or(const std::string& key, const std::string& fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        used_.insert(it->first);
        return it->second;
    }

    void finish() const {
        for (const auto& [key, value] : entries_)
            if (!used_.count(key))
                throw validation_error("model file: unknown key " + key);
    }

private:
    double parse(std::map<std::string, std::string>::iterator it) {
        const char* s = it->second.c_str();
        char* end = nullptr;
        double x = std::strtod(s, &end);
        if (end == s || *end != '\0')
            throw validation_error("model file: bad number for key " + it->first);
        used_.insert(it->first);
        return x;
    }

    std::map<std::string, std::string> entries_;
    std::set<std::string> used_;
};

} // namespace

std::string model_to_text(const ModelSpec& spec) {
    std::string out;
    out += "d ";
    out += std::to_string(spec.d);
    out += '\n';
    emit(out, "beta", spec.beta);
    emit(out, "gamma", spec.gamma);
    for (int i = 0; i < spec.d; ++i)
        for (int j = 0; j < spec.d; ++j)
            emit(out, idx2("kappa", i, j), spec.kappa(i, j));
    for (int i = 0; i < spec.d; ++i) emit(out, idx1("theta", i), spec.theta[i]);
    for (int i = 0; i < spec.d; ++i)
        for (int j = 0; j < spec.d; ++j)
            emit(out, idx2("sigma", i, j), spec.sigma(i, j));
    for (int i = 0; i <= spec.d; ++i) emit(out, idx1("p", i), spec.p[i]);
    for (int i = 0; i <= spec.d; ++i) emit(out, idx1("q", i), spec.q[i]);
    for (int i = 0; i < spec.d; ++i) emit(out, idx1("x0", i), spec.x0[i]);

    switch (spec.jumps.kind) {
    case JumpLaw::Kind::none:
        emit(out, "jump.intensity", 0.0);
        break;
    case JumpLaw::Kind::lognormal:
        out += "jump.kind lognormal\n";
        emit(out, "jump.intensity", spec.jumps.intensity);
        for (int i = 0; i < spec.d; ++i) emit(out, idx1("jump.mu", i), spec.jumps.mu[i]);
        for (int i = 0; i < spec.d; ++i)
            for (int j = 0; j < spec.d; ++j)
                emit(out, idx2("jump.cov", i, j), spec.jumps.cov(i, j));
        break;
    case JumpLaw::Kind::two_point:
        out += "jump.kind two_point\n";
        emit(out, "jump.intensity", spec.jumps.intensity);
        emit(out, "jump.prob", spec.jumps.prob);
        for (int i = 0; i < spec.d; ++i) emit(out, idx1("jump.a", i), spec.jumps.a[i]);
        for (int i = 0; i < spec.d; ++i) emit(out, idx1("jump.b", i), spec.jumps.b[i]);
        break;
    case JumpLaw::Kind::custom:
        throw validation_error("model file: custom jump law cannot be serialized");
    }
    return out;
}

ModelSpec model_from_text(const std::string& text) {
    KeyMap keys(text);

    ModelSpec spec;
    double draw = keys.number("d");
    spec.d = static_cast<int>(draw);
    if (spec.d < 1 || spec.d != draw)
        throw validation_error("model file: d must be a positive integer");
    const int d = spec.d;

    spec.beta = keys.number("beta");
    spec.gamma = keys.number("gamma");
    spec.kappa.resize(d, d);
    spec.sigma.resize(d, d);
    spec.theta.resize(d);
    spec.x0.resize(d);
    spec.p.resize(d + 1);
    spec.q.resize(d + 1);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            spec.kappa(i, j) = keys.number(idx2("kappa", i, j));
            spec.sigma(i, j) = keys.number(idx2("sigma", i, j));
        }
    for (int i = 0; i < d; ++i) {
        spec.theta[i] = keys.number(idx1("theta", i));
        spec.x0[i] = keys.number(idx1("x0", i));
    }
    for (int i = 0; i <= d; ++i) {
        spec.p[i] = keys.number(idx1("p", i));
        spec.q[i] = keys.number(idx1("q", i));
    }

    const std::string kind = keys.text_or("jump.kind", "none");
    const double intensity = keys.number_or("jump.intensity", 0.0);
    if (kind == "none") {
        spec.jumps = JumpLaw::none_law();
        if (intensity != 0.0)
            throw validation_error("model file: jump.intensity without jump.kind");
    } else if (kind == "lognormal") {
        Eigen::VectorXd mu(d);
        Eigen::MatrixXd cov(d, d);
        for (int i = 0; i < d; ++i) mu[i] = keys.number(idx1("jump.mu", i));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) cov(i, j) = keys.number(idx2("jump.cov", i, j));
        spec.jumps = JumpLaw::lognormal_law(intensity, mu, cov);
    } else if (kind == "two_point") {
        const double prob = keys.number("jump.prob");
        Eigen::VectorXd a(d), b(d);
        for (int i = 0; i < d; ++i) {
            a[i] = keys.number(idx1("jump.a", i));
            b[i] = keys.number(idx1("jump.b", i));
        }
        spec.jumps = JumpLaw::two_point_law(intensity, prob, a, b);
    } else {
        throw validation_error("model file: unknown jump.kind " + kind);
    }

    keys.finish();
    return spec;
}

ModelSpec load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    ModelSpec spec = model_from_text(buf.str());
    require_valid(spec);
    return spec;
}

void save_model(const ModelSpec& spec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot open output file: " + path);
    out << model_to_text(spec);
    if (!out) throw validation_error("failed writing model file: " + path);
}

} // namespace polydiv
