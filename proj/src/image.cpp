#include "vts/image.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>

namespace vts {

double ImageU8::mean() const {
    if (pixels.empty()) return 0.0;
    double sum = 0.0;
    for (std::uint8_t p : pixels) sum += p;
    return sum / static_cast<double>(pixels.size());
}

void write_ppm(const ImageU8& img, const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_ppm: cannot open " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw IoError("write_ppm: short write to " + path);
}

ImageU8 read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_ppm: cannot open " + path);

    auto next_token = [&in, &path]() {
        std::string tok;
        while (true) {
            int c = in.get();
            if (c == EOF) throw IoError("read_ppm: truncated header " + path);
            if (c == '#') {
                while (c != '\n' && c != EOF) c = in.get();
                continue;
            }
            if (std::isspace(c)) {
                if (!tok.empty()) return tok;
                continue;
            }
            tok.push_back(static_cast<char>(c));
        }
    };

    if (next_token() != "P6") throw IoError("read_ppm: not a P6 file " + path);
    int w = std::stoi(next_token());
    int h = std::stoi(next_token());
    int maxval = std::stoi(next_token());
    if (maxval != 255) throw IoError("read_ppm: unsupported maxval in " + path);

    ImageU8 img(h, w);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!in) throw IoError("read_ppm: truncated pixel data " + path);
    return img;
}

}  // namespace vts
