package com.shop.customer;

import com.shop.model.*;

public class Customer {
    private Address address;
    private List<Order> orders;
}
