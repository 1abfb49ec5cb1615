package com.shop.pricing;

class Helper {
}
