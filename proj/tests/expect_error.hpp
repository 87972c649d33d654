#pragma once

#include <gtest/gtest.h>

#include "isopara/error.hpp"

#define EXPECT_ERROR_CODE(stmt, expected)                                                   \
    do {                                                                                    \
        bool thrown_ = false;                                                               \
        try {                                                                               \
            (void)(stmt);                                                                   \
        } catch (const ::isopara::Error& e_) {                                              \
            thrown_ = true;                                                                 \
            EXPECT_EQ(e_.code(), (expected)) << e_.what();                                  \
        }                                                                                   \
        EXPECT_TRUE(thrown_) << "expected " << ::isopara::to_string(expected) << " from " #stmt; \
    } while (0)
