#ifndef FAIRCLUST_CSV_HPP
#define FAIRCLUST_CSV_HPP

#include <string>
#include <vector>

#include "fairclust/instance.hpp"

namespace fairclust {

/// Loads a comma-separated file with a header row: the named feature
/// columns become coordinates (parsed as doubles), the group column is
/// taken verbatim as the label. Errors name the missing column or the
/// offending row/column.
Dataset load_csv(const std::string& path, const std::string& group_column,
                 const std::vector<std::string>& feature_columns);

}  // namespace fairclust

#endif  // FAIRCLUST_CSV_HPP
