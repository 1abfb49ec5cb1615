package com.shop.util;

public class Helper {
}
