#pragma once

#include "weblog/cleaner.hpp"
#include "weblog/csv.hpp"
#include "weblog/errors.hpp"
#include "weblog/exporter.hpp"
#include "weblog/identity.hpp"
#include "weblog/log_entry.hpp"
#include "weblog/merger.hpp"
#include "weblog/parser.hpp"
#include "weblog/pipeline.hpp"
#include "weblog/sessionizer.hpp"
#include "weblog/summarizer.hpp"
#include "weblog/timestamp.hpp"
#include "weblog/url.hpp"
