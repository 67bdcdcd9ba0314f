#include "levytrade/csv.hpp"

#include <cmath>
#include <cstdio>

namespace levytrade {

std::string fmt6(double value)
{
    if (value == 0.0)
        value = 0.0;  // drop the sign of negative zero
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

std::string csv_row(const std::vector<std::string>& fields)
{
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i)
    {
        if (i)
            out += ',';
        out += fields[i];
    }
    return out;
}

}  // namespace levytrade
