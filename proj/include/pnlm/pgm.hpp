#pragma once

// PGM (netpbm P2/P5) reader and writer, maxval 255 only.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnlm/image.hpp"

namespace pnlm {

enum class PgmErrorKind {
    IoFailure,
    MalformedHeader,
    UnsupportedMaxval,
    TruncatedData,
    BadSample,
};

class PgmError : public std::runtime_error {
public:
    PgmError(PgmErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    PgmErrorKind kind() const { return kind_; }

private:
    PgmErrorKind kind_;
};

namespace detail {

// Reads the next header token, skipping whitespace and '#' comments, without
// consuming anything past the token.
inline std::string pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.peek()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(in.get()));
    }
    return tok;
}

inline int pgm_int(std::istream& in, const char* what) {
    const std::string tok = pgm_token(in);
    if (tok.empty()) {
        throw PgmError(PgmErrorKind::MalformedHeader, std::string("pgm: missing ") + what);
    }
    for (char ch : tok) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) {
            throw PgmError(PgmErrorKind::MalformedHeader,
                           std::string("pgm: non-numeric ") + what + " '" + tok + "'");
        }
    }
    long v = std::stol(tok);
    if (v < 0 || v > 1 << 30) {
        throw PgmError(PgmErrorKind::MalformedHeader, std::string("pgm: out-of-range ") + what);
    }
    return static_cast<int>(v);
}

}  // namespace detail

inline Image load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PgmError(PgmErrorKind::IoFailure, "pgm: cannot open '" + path + "'");
    }

    const std::string magic = detail::pgm_token(in);
    if (magic != "P2" && magic != "P5") {
        throw PgmError(PgmErrorKind::MalformedHeader, "pgm: bad magic '" + magic + "'");
    }
    const int width = detail::pgm_int(in, "width");
    const int height = detail::pgm_int(in, "height");
    const int maxval = detail::pgm_int(in, "maxval");
    if (width < 1 || height < 1) {
        throw PgmError(PgmErrorKind::MalformedHeader, "pgm: degenerate dimensions");
    }
    if (maxval != 255) {
        throw PgmError(PgmErrorKind::UnsupportedMaxval,
                       "pgm: unsupported maxval " + std::to_string(maxval) + ", expected 255");
    }

    Image img(width, height);
    const std::size_t n = img.size();
    if (magic == "P5") {
        // exactly one whitespace byte separates the header from the raster
        const int sep = in.get();
        if (sep == EOF || !std::isspace(sep)) {
            throw PgmError(PgmErrorKind::MalformedHeader, "pgm: missing raster separator");
        }
        std::vector<unsigned char> raw(n);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n) {
            throw PgmError(PgmErrorKind::TruncatedData, "pgm: truncated raster data");
        }
        for (std::size_t i = 0; i < n; ++i) img.pixels[i] = static_cast<double>(raw[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const std::string tok = detail::pgm_token(in);
            if (tok.empty()) {
                throw PgmError(PgmErrorKind::TruncatedData, "pgm: truncated sample data");
            }
            long v = -1;
            try {
                v = std::stol(tok);
            } catch (const std::exception&) {
                throw PgmError(PgmErrorKind::BadSample, "pgm: non-numeric sample '" + tok + "'");
            }
            if (v < 0 || v > maxval) {
                throw PgmError(PgmErrorKind::BadSample, "pgm: sample " + std::to_string(v) +
                                                            " exceeds maxval");
            }
            img.pixels[i] = static_cast<double>(v);
        }
    }
    return img;
}

// Clamps to [0, 255], rounds half away from zero, writes 8-bit samples.
// P5 by default; binary=false selects ASCII P2.
inline void save_pgm(const Image& img, const std::string& path, bool binary = true) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw PgmError(PgmErrorKind::IoFailure, "pgm: cannot create '" + path + "'");
    }
    out << (binary ? "P5" : "P2") << "\n" << img.width << " " << img.height << "\n255\n";

    auto quantize = [&](double v) -> int {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("save_pgm: nonfinite pixel value");
        }
        const double c = v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v);
        return static_cast<int>(std::lround(c));
    };

    if (binary) {
        std::vector<unsigned char> raw(img.size());
        for (std::size_t i = 0; i < img.size(); ++i) {
            raw[i] = static_cast<unsigned char>(quantize(img.pixels[i]));
        }
        out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    } else {
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                out << quantize(img.at(y, x)) << (x + 1 == img.width ? "" : " ");
            }
            out << "\n";
        }
    }
    if (!out) {
        throw PgmError(PgmErrorKind::IoFailure, "pgm: write failed for '" + path + "'");
    }
}

}  // namespace pnlm
