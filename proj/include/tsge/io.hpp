// Deterministic CSV/JSON emission: fixed float formatting, schema comment
// line, rows written in a fixed order so identical runs give identical bytes.
#ifndef TSGE_IO_HPP_
#define TSGE_IO_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsge {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::string& schema,
              const std::vector<std::string>& columns) {
        std::filesystem::create_directories(path.parent_path());
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw std::runtime_error("cannot open " + path.string());
        out_ << "# tsge-csv v1 " << schema << "\n";
        write_row(columns);
    }

    void write_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    void write_numeric_row(std::initializer_list<double> cells) {
        std::vector<std::string> row;
        row.reserve(cells.size());
        for (double v : cells) row.push_back(fmt_double(v));
        write_row(row);
    }

  private:
    std::ofstream out_;
};

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << content;
}

}  // namespace tsge

#endif  // TSGE_IO_HPP_
